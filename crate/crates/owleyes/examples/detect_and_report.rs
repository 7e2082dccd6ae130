//! Example: batch detection with JSON and HTML reports.
//!
//! Classifies every screenshot in a directory with a trained checkpoint,
//! localizes the flagged ones, writes Grad-CAM overlays, and emits both
//! report formats. Reuses the checkpoint from the `train_classifier` example
//! when present, otherwise trains one first.
//!
//! Run with: `cargo run --release --example detect_and_report`

use owleyes::demo::{write_demo_corpus, DemoOptions};
use owleyes::model::{build_model, load_checkpoint, save_checkpoint, train, Model, ModelConfig, TrainHyper};
use owleyes::report::{emit_report_html, emit_report_json, run_detect_batch, DetectOptions};
use owleyes::synth::{generate_dataset, GenerateOptions, IssueCategory, Label};

fn ensure_checkpoint(base: &std::path::Path) -> owleyes::Result<std::path::PathBuf> {
    let shared = std::env::temp_dir().join("owleyes_examples/train_classifier/model.owl");
    if shared.is_file() && load_checkpoint(&shared).is_ok() {
        println!("using checkpoint from the train_classifier example: {}", shared.display());
        return Ok(shared);
    }
    println!("no checkpoint found; training a quick blurred-vs-clean model...");
    let corpus = base.join("train_corpus");
    let dataset = base.join("train_dataset");
    write_demo_corpus(&corpus, &DemoOptions { screens: 8, seed: 11, ..Default::default() })?;
    let manifest = generate_dataset(
        &corpus,
        &dataset,
        &GenerateOptions {
            count: 40,
            categories: vec![IssueCategory::BlurredScreen],
            master_seed: 3,
            threads: 0,
        },
    )?;
    let model: Model<f32> = build_model(&ModelConfig::desk(), 99)?;
    let hyper = TrainHyper { epochs: 10, batch_size: 16, lr: 0.01, momentum: 0.9, seed: 5 };
    let (model, _) = train(model, &manifest, &hyper)?;
    let ckpt = base.join("model.owl");
    save_checkpoint(&model, &ckpt)?;
    Ok(ckpt)
}

fn main() -> owleyes::Result<()> {
    let base = std::env::temp_dir().join("owleyes_examples/detect_and_report");
    let ckpt = ensure_checkpoint(&base)?;

    // A directory of fresh screenshots: some blurred, some clean.
    let input = base.join("screens");
    let corpus = base.join("detect_corpus");
    write_demo_corpus(&corpus, &DemoOptions { screens: 6, seed: 77, ..Default::default() })?;
    generate_dataset(
        &corpus,
        &input,
        &GenerateOptions {
            count: 3,
            categories: vec![IssueCategory::BlurredScreen],
            master_seed: 8,
            threads: 0,
        },
    )?;
    std::fs::remove_file(input.join("manifest.jsonl")).ok();

    println!("\nscanning {} ...", input.display());
    let opts = DetectOptions {
        threshold: 0.5,
        overlays_dir: Some(base.join("overlays")),
        threads: 0,
    };
    let doc = run_detect_batch(&ckpt, &input, &opts)?;
    println!("{} issues found in {} screens", doc.num_issues, doc.num_screens);
    for row in &doc.rows {
        let marker = match row.verdict {
            Label::Bug => "BUG  ",
            Label::Clean => "clean",
        };
        println!("  [{marker}] p={:.3}  {}", row.bug_probability, row.path);
        if let Some(region) = row.region {
            println!(
                "          region [{}, {}, {}, {}]",
                region.left, region.top, region.right, region.bottom
            );
        }
    }

    let json_path = base.join("report.json");
    let html_path = base.join("report.html");
    emit_report_json(&doc, &json_path)?;
    emit_report_html(&doc, &html_path)?;
    println!("\nreports written:");
    println!("  {}", json_path.display());
    println!("  {}", html_path.display());
    Ok(())
}
