//! Example: synthesize a labeled UI-display-issue dataset.
//!
//! Builds a small corpus of clean synthetic screens with matching view
//! hierarchies, then injects all five issue categories and writes the images
//! plus a JSON-lines manifest.
//!
//! Run with: `cargo run --release --example generate_dataset`

use owleyes::demo::{write_demo_corpus, DemoOptions};
use owleyes::synth::{generate_dataset, GenerateOptions, IssueCategory};

fn main() -> owleyes::Result<()> {
    let base = std::env::temp_dir().join("owleyes_examples/generate_dataset");
    let corpus_dir = base.join("corpus");
    let out_dir = base.join("dataset");

    println!("writing a demo corpus of clean screens to {}", corpus_dir.display());
    let pairs = write_demo_corpus(&corpus_dir, &DemoOptions { screens: 8, seed: 7, ..Default::default() })?;
    println!("  {} (screenshot, hierarchy) pairs", pairs.len());

    let opts = GenerateOptions {
        count: 25,
        categories: IssueCategory::ALL.to_vec(),
        master_seed: 42,
        threads: 0,
    };
    println!("\ninjecting {} issues across all five categories...", opts.count);
    let manifest = generate_dataset(&corpus_dir, &out_dir, &opts)?;

    println!("dataset written to {}", out_dir.display());
    println!("  rows: {} ({} bug, {} clean)", manifest.rows.len(),
        manifest.bug_rows().count(), manifest.clean_rows().count());
    for (category, filled) in &manifest.header.filled {
        println!("  {category}: {filled}");
    }

    println!("\nfirst bug rows:");
    for row in manifest.bug_rows().take(5) {
        let region = row.region.unwrap();
        println!(
            "  {} [{} {} {} {}] seed {}",
            row.path.display(),
            region.left,
            region.top,
            region.right,
            region.bottom,
            row.seed.unwrap()
        );
    }
    println!("\nsame seed, same bytes: rerun this example and the files will not change.");
    Ok(())
}
