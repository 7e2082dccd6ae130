//! Example: Grad-CAM localization of an injected issue.
//!
//! Injects a missing-image placeholder into a clean screen, trains a small
//! detector on that category, and renders the class-discriminative heatmap
//! over the buggy screenshot, comparing the saliency peak against the
//! ground-truth injection region.
//!
//! Run with: `cargo run --release --example localize_issue`

use owleyes::demo::{write_demo_corpus, DemoOptions};
use owleyes::localize::{grad_cam, heatmap_to_region, render_overlay};
use owleyes::model::{build_model, train, Model, ModelConfig, TrainHyper, BUG_CLASS};
use owleyes::raster::{load_rgb, save_png};
use owleyes::synth::{generate_dataset, GenerateOptions, IssueCategory};

fn main() -> owleyes::Result<()> {
    let base = std::env::temp_dir().join("owleyes_examples/localize_issue");
    let corpus = base.join("corpus");
    let dataset = base.join("dataset");

    println!("building a missing-image training set...");
    write_demo_corpus(&corpus, &DemoOptions { screens: 8, seed: 21, ..Default::default() })?;
    let manifest = generate_dataset(
        &corpus,
        &dataset,
        &GenerateOptions {
            count: 30,
            categories: vec![IssueCategory::MissingImage],
            master_seed: 9,
            threads: 0,
        },
    )?;

    let model: Model<f32> = build_model(&ModelConfig::desk(), 4)?;
    let hyper = TrainHyper { epochs: 10, batch_size: 16, lr: 0.01, momentum: 0.9, seed: 12 };
    println!("training for {} epochs...", hyper.epochs);
    let (model, history) = train(model, &manifest, &hyper)?;
    let last = history.epochs.last().unwrap();
    println!("  final train accuracy {:.3}", last.accuracy);

    let row = manifest.bug_rows().next().expect("at least one bug row");
    let truth = row.region.unwrap();
    let img = load_rgb(&manifest.resolve(row))?;
    println!("\nlocalizing {} ...", row.path.display());

    let heatmap = grad_cam(&model, &img, BUG_CLASS)?;
    let (px, py) = heatmap.argmax();
    println!(
        "  ground-truth region [{}, {}, {}, {}]",
        truth.left, truth.top, truth.right, truth.bottom
    );
    println!("  saliency peak at ({px}, {py}) — inside truth: {}", truth.contains(px as i32, py as i32));
    // The desk model's activation grid is coarse (3x2 cells), so low cuts
    // cover most of the screen; higher cuts tighten around the peak.
    for threshold in [0.5f32, 0.8, 0.95] {
        match heatmap_to_region(&heatmap, threshold) {
            Some(r) => println!(
                "  region at threshold {threshold}: [{}, {}, {}, {}]",
                r.left, r.top, r.right, r.bottom
            ),
            None => println!("  region at threshold {threshold}: none"),
        }
    }

    let overlay = render_overlay(&img, &heatmap, 0.45)?;
    let out = base.join("overlay.png");
    save_png(&overlay, &out)?;
    println!("  overlay written to {}", out.display());
    Ok(())
}
