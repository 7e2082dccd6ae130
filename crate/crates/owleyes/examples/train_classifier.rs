//! Example: train the desk-profile classifier on a synthetic dataset.
//!
//! Generates a blurred-vs-clean dataset, trains for a few epochs of seeded
//! mini-batch SGD, evaluates precision/recall/F1, and saves a checkpoint that
//! the `detect_and_report` / `localize_issue` examples pick up.
//!
//! Run with: `cargo run --release --example train_classifier`

use owleyes::demo::{write_demo_corpus, DemoOptions};
use owleyes::model::{build_model, evaluate, save_checkpoint, train, ModelConfig, TrainHyper};
use owleyes::synth::{generate_dataset, GenerateOptions, IssueCategory};

/// Shared output location so the detection examples can reuse the model.
pub fn example_dir() -> std::path::PathBuf {
    std::env::temp_dir().join("owleyes_examples/train_classifier")
}

fn main() -> owleyes::Result<()> {
    let base = example_dir();
    let corpus_dir = base.join("corpus");
    let dataset_dir = base.join("dataset");

    println!("generating training data (blurred-screen vs clean)...");
    write_demo_corpus(&corpus_dir, &DemoOptions { screens: 8, seed: 11, ..Default::default() })?;
    let manifest = generate_dataset(
        &corpus_dir,
        &dataset_dir,
        &GenerateOptions {
            count: 40,
            categories: vec![IssueCategory::BlurredScreen],
            master_seed: 3,
            threads: 0,
        },
    )?;
    println!("  {} samples", manifest.rows.len());

    let config = ModelConfig::desk();
    let model = build_model::<f32>(&config, 99)?;
    let hyper = TrainHyper { epochs: 10, batch_size: 16, lr: 0.01, momentum: 0.9, seed: 5 };
    println!(
        "\ntraining desk profile ({}x{}x{}, {} parameters) for {} epochs...",
        config.input_channels,
        config.input_height,
        config.input_width,
        model.trainable_param_count(),
        hyper.epochs
    );
    let (model, history) = train(model, &manifest, &hyper)?;
    for stats in &history.epochs {
        println!("  epoch {:>2}  loss {:.4}  accuracy {:.3}", stats.epoch, stats.loss, stats.accuracy);
    }

    let metrics = evaluate(&model, &manifest)?;
    println!(
        "\ntraining-set metrics: precision {:.3}, recall {:.3}, F1 {:.3}, accuracy {:.3}",
        metrics.precision, metrics.recall, metrics.f1, metrics.accuracy
    );

    let ckpt = base.join("model.owl");
    save_checkpoint(&model, &ckpt)?;
    println!("checkpoint saved to {}", ckpt.display());
    Ok(())
}
