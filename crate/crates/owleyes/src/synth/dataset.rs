//! Dataset generation and the JSON-lines manifest.
//!
//! The manifest's first line is a header (tool version, master seed,
//! requested count, per-category fill counts); every following line is one
//! row, sorted by output path. Per-row seeds come from
//! `mix_seed(master_seed, row_index)`, so the output is identical however the
//! work is scheduled.

use super::hierarchy::parse_hierarchy;
use super::inject::inject_issue;
use super::IssueCategory;
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::raster::{load_rgb, save_png};
use crate::rng::mix_seed;
use crate::TOOL_VERSION;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bug,
    Clean,
}

/// One manifest line. Bug rows carry category, region and seed; clean rows
/// carry none of them. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub label: Label,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub category: Option<IssueCategory>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub region: Option<Rect>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub tool_version: String,
    pub master_seed: u64,
    /// Bug rows requested.
    pub requested: usize,
    /// Bug rows actually produced per category; lower than its share when a
    /// category found no candidates anywhere in the corpus.
    pub filled: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub header: ManifestHeader,
    pub rows: Vec<ManifestRow>,
    /// Directory row paths are relative to (the manifest file's parent).
    base_dir: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn new(header: ManifestHeader, rows: Vec<ManifestRow>) -> Self {
        DatasetManifest { header, rows, base_dir: None }
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = Some(dir.into());
        self
    }

    pub fn base_dir(&self) -> Option<&Path> {
        self.base_dir.as_deref()
    }

    /// Absolute-ish path of a row, resolved against the manifest directory.
    pub fn resolve(&self, row: &ManifestRow) -> PathBuf {
        match (&self.base_dir, row.path.is_absolute()) {
            (Some(base), false) => base.join(&row.path),
            _ => row.path.clone(),
        }
    }

    pub fn bug_rows(&self) -> impl Iterator<Item = &ManifestRow> {
        self.rows.iter().filter(|r| r.label == Label::Bug)
    }

    pub fn clean_rows(&self) -> impl Iterator<Item = &ManifestRow> {
        self.rows.iter().filter(|r| r.label == Label::Clean)
    }

    /// Header line plus one JSON object per row.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(
            &serde_json::to_string(&self.header)
                .map_err(|e| Error::Parse(format!("manifest header: {e}")))?,
        );
        out.push('\n');
        for row in &self.rows {
            out.push_str(
                &serde_json::to_string(row)
                    .map_err(|e| Error::Parse(format!("manifest row: {e}")))?,
            );
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_jsonl()?.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Parse("manifest is empty".into()))?;
        let header: ManifestHeader = serde_json::from_str(header_line)
            .map_err(|e| Error::Parse(format!("manifest header: {e}")))?;
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: ManifestRow = serde_json::from_str(line)
                .map_err(|e| Error::Parse(format!("manifest row {}: {e}", i + 2)))?;
            rows.push(row);
        }
        let base = path.parent().map(Path::to_path_buf);
        Ok(DatasetManifest { header, rows, base_dir: base })
    }
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    /// Number of bug images to produce (an equal number of clean rows is
    /// added).
    pub count: usize,
    /// Categories to rotate through, in order.
    pub categories: Vec<IssueCategory>,
    pub master_seed: u64,
    /// Worker threads; 0 uses the global rayon default.
    pub threads: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            count: 100,
            categories: IssueCategory::ALL.to_vec(),
            master_seed: 0,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone)]
struct CorpusPair {
    image: PathBuf,
    hierarchy: PathBuf,
}

fn scan_corpus(dir: &Path) -> Result<Vec<CorpusPair>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut pairs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        if matches!(ext.as_str(), "png" | "jpg" | "jpeg") {
            let hierarchy = path.with_extension("json");
            if hierarchy.is_file() {
                pairs.push(CorpusPair { image: path, hierarchy });
            }
        }
    }
    pairs.sort_by(|a, b| a.image.cmp(&b.image));
    if pairs.is_empty() {
        return Err(Error::Validation(format!(
            "no (image, hierarchy JSON) pairs found in {}",
            dir.display()
        )));
    }
    Ok(pairs)
}

/// Deterministic per-row work: returns `None` when no corpus screen offers a
/// candidate for the row's category.
fn make_bug_row(
    pairs: &[CorpusPair],
    out_dir: &Path,
    index: usize,
    category: IssueCategory,
    master_seed: u64,
) -> Result<Option<ManifestRow>> {
    let seed = mix_seed(master_seed, index as u64);
    for attempt in 0..pairs.len() {
        let pair = &pairs[(index + attempt) % pairs.len()];
        let img = load_rgb(&pair.image)?;
        let json = fs::read_to_string(&pair.hierarchy)
            .map_err(|e| Error::io(&pair.hierarchy, e))?;
        let hierarchy = parse_hierarchy(&json, (img.width(), img.height()))?;
        match inject_issue(&img, &hierarchy, category, seed) {
            Ok((out_img, record)) => {
                let name = format!("{index:06}_{}.png", category.slug());
                save_png(&out_img, &out_dir.join(&name))?;
                return Ok(Some(ManifestRow {
                    path: PathBuf::from(name),
                    label: Label::Bug,
                    category: Some(category),
                    region: Some(record.region),
                    seed: Some(seed),
                }));
            }
            Err(Error::NoCandidate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn make_clean_row(
    pairs: &[CorpusPair],
    out_dir: &Path,
    count: usize,
    j: usize,
) -> Result<ManifestRow> {
    let pair = &pairs[j % pairs.len()];
    let img = load_rgb(&pair.image)?;
    let name = format!("{:06}_clean.png", count + j);
    save_png(&img, &out_dir.join(&name))?;
    Ok(ManifestRow {
        path: PathBuf::from(name),
        label: Label::Clean,
        category: None,
        region: None,
        seed: None,
    })
}

/// Generates `count` bug screenshots (split round-robin across the requested
/// categories) plus an equal number of clean ones, writes everything under
/// `out_dir`, and returns the manifest (also written as
/// `out_dir/manifest.jsonl`).
///
/// Full-scale training corpora run to ~20,000 generated screenshots; the
/// bundled tests and examples use a few hundred.
pub fn generate_dataset(
    corpus_dir: &Path,
    out_dir: &Path,
    opts: &GenerateOptions,
) -> Result<DatasetManifest> {
    if opts.count == 0 {
        return Err(Error::Argument("count must be positive".into()));
    }
    if opts.categories.is_empty() {
        return Err(Error::Argument("at least one category is required".into()));
    }
    let pairs = scan_corpus(corpus_dir)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let run = || -> Result<Vec<Option<ManifestRow>>> {
        (0..opts.count)
            .into_par_iter()
            .map(|i| {
                let category = opts.categories[i % opts.categories.len()];
                make_bug_row(&pairs, out_dir, i, category, opts.master_seed)
            })
            .collect()
    };
    let bug_results = if opts.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
        pool.install(run)?
    } else {
        run()?
    };

    let mut filled: BTreeMap<String, usize> = BTreeMap::new();
    for cat in &opts.categories {
        filled.entry(cat.slug().to_string()).or_insert(0);
    }
    let mut rows: Vec<ManifestRow> = Vec::new();
    for row in bug_results.into_iter().flatten() {
        let cat = row.category.expect("bug rows carry a category");
        *filled.entry(cat.slug().to_string()).or_insert(0) += 1;
        rows.push(row);
    }

    let clean_count = rows.len();
    let clean_run = || -> Result<Vec<ManifestRow>> {
        (0..clean_count)
            .into_par_iter()
            .map(|j| make_clean_row(&pairs, out_dir, opts.count, j))
            .collect()
    };
    let clean_rows = if opts.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
        pool.install(clean_run)?
    } else {
        clean_run()?
    };
    rows.extend(clean_rows);
    rows.sort_by(|a, b| a.path.cmp(&b.path));

    let manifest = DatasetManifest {
        header: ManifestHeader {
            tool_version: TOOL_VERSION.to_string(),
            master_seed: opts.master_seed,
            requested: opts.count,
            filled,
        },
        rows,
        base_dir: Some(out_dir.to_path_buf()),
    };
    manifest.write(&out_dir.join("manifest.jsonl"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip_through_jsonl() {
        let header = ManifestHeader {
            tool_version: TOOL_VERSION.to_string(),
            master_seed: 5,
            requested: 2,
            filled: BTreeMap::from([("blurred-screen".to_string(), 2)]),
        };
        let rows = vec![
            ManifestRow {
                path: PathBuf::from("000000_blurred-screen.png"),
                label: Label::Bug,
                category: Some(IssueCategory::BlurredScreen),
                region: Some(Rect::new(0, 0, 10, 10)),
                seed: Some(42),
            },
            ManifestRow {
                path: PathBuf::from("000002_clean.png"),
                label: Label::Clean,
                category: None,
                region: None,
                seed: None,
            },
        ];
        let manifest = DatasetManifest::new(header, rows);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        manifest.write(&path).unwrap();
        let back = DatasetManifest::read(&path).unwrap();
        assert_eq!(back.header, manifest.header);
        assert_eq!(back.rows, manifest.rows);
        assert_eq!(back.base_dir(), Some(dir.path()));
    }

    #[test]
    fn clean_rows_serialize_without_optional_fields() {
        let row = ManifestRow {
            path: PathBuf::from("x.png"),
            label: Label::Clean,
            category: None,
            region: None,
            seed: None,
        };
        let json = serde_json::to_string(&row).unwrap();
        assert_eq!(json, r#"{"path":"x.png","label":"clean"}"#);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let err = generate_dataset(dir.path(), out.path(), &GenerateOptions::default());
        assert!(matches!(err, Err(Error::Validation(_))));
    }
}
