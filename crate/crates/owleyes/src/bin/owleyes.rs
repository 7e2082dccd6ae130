//! Command-line front end. Every flow here is a thin wrapper over the
//! library; see the crate examples for the same flows in code.

use clap::{Parser, Subcommand};
use owleyes::error::{Error, Result};
use owleyes::explore::{explore, load_app_graph, Strategy};
use owleyes::localize::{grad_cam, heatmap_to_region, render_overlay};
use owleyes::model::{
    build_model, evaluate, load_checkpoint, predict, save_checkpoint, train, Model, ModelConfig,
    TrainHyper, BUG_CLASS,
};
use owleyes::raster::{load_rgb, save_png};
use owleyes::report::{emit_report_html, emit_report_json, run_detect_batch, DetectOptions};
use owleyes::synth::{generate_dataset, DatasetManifest, GenerateOptions, IssueCategory};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "owleyes",
    version,
    about = "Detect and localize UI display issues in app screenshots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled dataset by injecting display issues into clean screenshots
    Synth {
        /// Directory of (image, hierarchy JSON) pairs sharing basenames
        #[arg(long)]
        corpus: PathBuf,
        /// Output directory for images and manifest.jsonl
        #[arg(long)]
        out: PathBuf,
        /// Number of bug images (an equal number of clean rows is added)
        #[arg(long)]
        count: usize,
        /// Comma-separated categories (default: all five)
        #[arg(long, value_delimiter = ',')]
        categories: Vec<IssueCategory>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train the classifier on a dataset manifest
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Model profile: canonical (3x768x448) or desk (3x192x128)
        #[arg(long, default_value = "canonical")]
        profile: String,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 0.9)]
        momentum: f64,
        #[arg(long, default_value_t = 16)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Checkpoint output path
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint against a labeled manifest
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Classify every screenshot in a directory and emit reports
    Detect {
        #[arg(long)]
        model: PathBuf,
        /// Directory of screenshots (never modified)
        #[arg(long)]
        input: PathBuf,
        /// Write the JSON report here
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the HTML report here
        #[arg(long)]
        html: Option<PathBuf>,
        /// Write Grad-CAM overlays for flagged screenshots into this directory
        #[arg(long)]
        overlays: Option<PathBuf>,
        /// Heatmap threshold for region extraction
        #[arg(long, default_value_t = 0.5)]
        threshold: f32,
        /// Command to run with the report path once it is written
        #[arg(long)]
        notify_cmd: Option<String>,
    },
    /// Grad-CAM heatmap and overlay for a single screenshot
    Localize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        image: PathBuf,
        /// Overlay PNG output path
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f32,
        /// Optionally dump the raw heatmap as JSON
        #[arg(long)]
        heatmap_json: Option<PathBuf>,
    },
    /// Traverse an app screen-graph and record the visited screens
    Explore {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "bfs")]
        strategy: Strategy,
        /// Maximum screens to visit
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace JSON output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_manifest(path: &std::path::Path) -> Result<DatasetManifest> {
    DatasetManifest::read(path)
}

fn run(cli: Cli) -> Result<()> {
    let threads = owleyes::configured_threads();
    match cli.command {
        Command::Synth { corpus, out, count, categories, seed } => {
            let opts = GenerateOptions {
                count,
                categories: if categories.is_empty() {
                    IssueCategory::ALL.to_vec()
                } else {
                    categories
                },
                master_seed: seed,
                threads,
            };
            let manifest = generate_dataset(&corpus, &out, &opts)?;
            println!(
                "wrote {} rows ({} bug, {} clean) to {}",
                manifest.rows.len(),
                manifest.bug_rows().count(),
                manifest.clean_rows().count(),
                out.join("manifest.jsonl").display()
            );
            for (category, filled) in &manifest.header.filled {
                println!("  {category}: {filled}");
            }
        }
        Command::Train { manifest, profile, epochs, lr, momentum, batch, seed, out } => {
            let config = ModelConfig::profile(&profile)
                .ok_or_else(|| Error::Argument(format!("unknown profile {profile:?}")))?;
            let manifest = load_manifest(&manifest)?;
            let model: Model<f32> = build_model(&config, seed)?;
            let hyper = TrainHyper { epochs, batch_size: batch, lr, momentum, seed };
            let (model, history) = train(model, &manifest, &hyper)?;
            for warning in &history.warnings {
                eprintln!("warning: {warning}");
            }
            for stats in &history.epochs {
                println!(
                    "epoch {:>3}  loss {:.6}  accuracy {:.4}",
                    stats.epoch, stats.loss, stats.accuracy
                );
            }
            save_checkpoint(&model, &out)?;
            println!("checkpoint written to {}", out.display());
        }
        Command::Eval { model, manifest } => {
            let model = load_checkpoint(&model)?;
            let manifest = load_manifest(&manifest)?;
            let metrics = evaluate(&model, &manifest)?;
            let json = serde_json::to_string_pretty(&metrics)
                .map_err(|e| Error::Parse(format!("metrics json: {e}")))?;
            println!("{json}");
        }
        Command::Detect { model, input, json, html, overlays, threshold, notify_cmd } => {
            let opts = DetectOptions { threshold, overlays_dir: overlays, threads };
            let doc = run_detect_batch(&model, &input, &opts)?;
            println!("{} issues in {} screens", doc.num_issues, doc.num_screens);
            if !doc.skipped.is_empty() {
                eprintln!("skipped {} unreadable files", doc.skipped.len());
            }
            let mut report_path = None;
            if let Some(path) = &json {
                emit_report_json(&doc, path)?;
                report_path = Some(path.clone());
            }
            if let Some(path) = &html {
                emit_report_html(&doc, path)?;
                report_path.get_or_insert_with(|| path.clone());
            }
            if let (Some(cmd), Some(path)) = (&notify_cmd, &report_path) {
                let status = std::process::Command::new(cmd)
                    .arg(path)
                    .status()
                    .map_err(|e| Error::io(PathBuf::from(cmd), e))?;
                if !status.success() {
                    return Err(Error::Validation(format!(
                        "notify command {cmd:?} exited with {status}"
                    )));
                }
            }
        }
        Command::Localize { model, image, out, threshold, heatmap_json } => {
            let model = load_checkpoint(&model)?;
            let img = load_rgb(&image)?;
            let verdict = predict(&model, &img)?;
            let heatmap = grad_cam(&model, &img, BUG_CLASS)?;
            let region = heatmap_to_region(&heatmap, threshold);
            let overlay = render_overlay(&img, &heatmap, owleyes::report::OVERLAY_ALPHA)?;
            save_png(&overlay, &out)?;
            if let Some(path) = &heatmap_json {
                heatmap.write_json(path)?;
            }
            let summary = serde_json::json!({
                "image": image.display().to_string(),
                "verdict": if verdict.is_bug { "bug" } else { "clean" },
                "bug_probability": verdict.bug_probability,
                "region": region,
                "zero_saliency": heatmap.zero_saliency,
                "overlay": out.display().to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
        }
        Command::Explore { graph, strategy, budget, seed, out } => {
            let text = std::fs::read_to_string(&graph).map_err(|e| Error::io(&graph, e))?;
            let app = load_app_graph(&text)?;
            let trace = explore(&app, strategy, budget, seed);
            let json = serde_json::to_string_pretty(&trace)
                .map_err(|e| Error::Parse(format!("trace json: {e}")))?;
            match out {
                Some(path) => {
                    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
                    println!("visited {} screens; trace written to {}", trace.visited.len(), path.display());
                }
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let threads = owleyes::configured_threads();
    if threads > 0 {
        // Cap rayon's global pool; scoped pools in the library re-check this.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
