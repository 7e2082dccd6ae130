//! Batch detection and report emission.
//!
//! `run_detect_batch` classifies every readable image in a directory,
//! localizes the flagged ones with Grad-CAM, and produces a
//! [`ReportDocument`] that serializes to byte-deterministic JSON and a
//! self-contained static HTML page.

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::localize::{grad_cam, heatmap_to_region, render_overlay};
use crate::model::{checkpoint_id, load_checkpoint, predict, Model, Verdict, BUG_CLASS};
use crate::raster::{load_rgb, save_png};
use crate::synth::Label;
use crate::TOOL_VERSION;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Default blend strength for overlay rendering.
pub const OVERLAY_ALPHA: f32 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub path: String,
    pub verdict: Label,
    pub bug_probability: f64,
    pub region: Option<Rect>,
    pub overlay_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

/// Batch detection results; `rows` are sorted by path and `num_issues`
/// counts the bug verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub model_checkpoint_id: String,
    pub num_screens: usize,
    pub num_issues: usize,
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<SkippedFile>,
}

#[derive(Debug, Clone)]
pub struct DetectOptions {
    /// Heatmap threshold for region extraction.
    pub threshold: f32,
    /// Directory overlays are written into (input dirs are never touched);
    /// `None` disables overlay rendering.
    pub overlays_dir: Option<PathBuf>,
    /// Worker threads; 0 uses the global rayon default.
    pub threads: usize,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions { threshold: 0.5, overlays_dir: None, threads: 0 }
    }
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        if path.is_file() && matches!(ext.as_str(), "png" | "jpg" | "jpeg") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn detect_one(
    model: &Model<f32>,
    path: &Path,
    opts: &DetectOptions,
) -> std::result::Result<ReportRow, SkippedFile> {
    let skip = |reason: String| SkippedFile { path: path.display().to_string(), reason };
    let img = load_rgb(path).map_err(|e| skip(e.to_string()))?;
    let verdict: Verdict = predict(model, &img).map_err(|e| skip(e.to_string()))?;

    let (mut region, mut overlay_path) = (None, None);
    if verdict.is_bug {
        let heatmap = grad_cam(model, &img, BUG_CLASS).map_err(|e| skip(e.to_string()))?;
        region = heatmap_to_region(&heatmap, opts.threshold);
        if let Some(dir) = &opts.overlays_dir {
            let name = format!(
                "{}_overlay.png",
                path.file_stem().and_then(|s| s.to_str()).unwrap_or("screenshot")
            );
            let out = dir.join(name);
            let rendered = render_overlay(&img, &heatmap, OVERLAY_ALPHA)
                .and_then(|o| save_png(&o, &out));
            match rendered {
                Ok(()) => overlay_path = Some(out.display().to_string()),
                Err(e) => return Err(skip(e.to_string())),
            }
        }
    }
    Ok(ReportRow {
        path: path.display().to_string(),
        verdict: if verdict.is_bug { Label::Bug } else { Label::Clean },
        bug_probability: verdict.bug_probability,
        region,
        overlay_path,
    })
}

/// Classifies every readable image directly under `input_dir` (sorted by
/// file name; `.png`/`.jpg`/`.jpeg` extensions). Unreadable files land in
/// the report's `skipped` section rather than being dropped.
pub fn run_detect_batch(
    model_path: &Path,
    input_dir: &Path,
    opts: &DetectOptions,
) -> Result<ReportDocument> {
    let model = load_checkpoint(model_path)?;
    let id = checkpoint_id(model_path)?;
    if let Some(dir) = &opts.overlays_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let files = list_images(input_dir)?;

    let work = || -> Vec<std::result::Result<ReportRow, SkippedFile>> {
        files.par_iter().map(|path| detect_one(&model, path, opts)).collect()
    };
    let outcomes = if opts.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
        pool.install(work)
    } else {
        work()
    };

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(skip) => skipped.push(skip),
        }
    }
    rows.sort_by(|a, b| a.path.cmp(&b.path));
    skipped.sort_by(|a, b| a.path.cmp(&b.path));
    let num_issues = rows.iter().filter(|r| r.verdict == Label::Bug).count();
    Ok(ReportDocument {
        tool_version: TOOL_VERSION.to_string(),
        model_checkpoint_id: id,
        num_screens: rows.len(),
        num_issues,
        rows,
        skipped,
    })
}

/// Pretty-printed JSON with fixed key order; equal documents produce equal
/// bytes.
pub fn emit_report_json(doc: &ReportDocument, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(doc)
        .map_err(|e| Error::Parse(format!("report json: {e}")))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn parse_report_json(text: &str) -> Result<ReportDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("report json: {e}")))
}

fn escape_html(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Single self-contained static page: summary counts plus one table row per
/// screenshot, with links to flagged screenshots and overlays.
pub fn emit_report_html(doc: &ReportDocument, path: &Path) -> Result<()> {
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>UI display issue report</title>\n<style>\n");
    html.push_str(
        "body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}\n\
         td,th{border:1px solid #999;padding:4px 8px}th{background:#eee}\n\
         .bug{color:#b00020;font-weight:bold}.clean{color:#2e7d32}\n",
    );
    html.push_str("</style>\n</head>\n<body>\n");
    html.push_str(&format!(
        "<h1>UI display issue report</h1>\n<p>{} issues found in {} screens \
         (tool {}, model {}).</p>\n",
        doc.num_issues,
        doc.num_screens,
        escape_html(&doc.tool_version),
        escape_html(&doc.model_checkpoint_id)
    ));
    html.push_str(
        "<table>\n<tr><th>screenshot</th><th>verdict</th><th>bug probability</th>\
         <th>region</th><th>overlay</th></tr>\n",
    );
    for row in &doc.rows {
        let verdict = match row.verdict {
            Label::Bug => "<span class=\"bug\">bug</span>",
            Label::Clean => "<span class=\"clean\">clean</span>",
        };
        let region = row
            .region
            .map(|r| format!("[{}, {}, {}, {}]", r.left, r.top, r.right, r.bottom))
            .unwrap_or_else(|| "-".to_string());
        let overlay = row
            .overlay_path
            .as_deref()
            .map(|p| format!("<a href=\"{0}\">{0}</a>", escape_html(p)))
            .unwrap_or_else(|| "-".to_string());
        html.push_str(&format!(
            "<tr><td><a href=\"{0}\">{0}</a></td><td>{1}</td><td>{2:.4}</td><td>{3}</td><td>{4}</td></tr>\n",
            escape_html(&row.path),
            verdict,
            row.bug_probability,
            region,
            overlay
        ));
    }
    html.push_str("</table>\n");
    if !doc.skipped.is_empty() {
        html.push_str("<h2>Skipped files</h2>\n<ul>\n");
        for skip in &doc.skipped {
            html.push_str(&format!(
                "<li>{}: {}</li>\n",
                escape_html(&skip.path),
                escape_html(&skip.reason)
            ));
        }
        html.push_str("</ul>\n");
    }
    html.push_str("</body>\n</html>\n");
    std::fs::write(path, html).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_doc() -> ReportDocument {
        ReportDocument {
            tool_version: TOOL_VERSION.to_string(),
            model_checkpoint_id: "abc123".to_string(),
            num_screens: 3,
            num_issues: 1,
            rows: vec![
                ReportRow {
                    path: "a.png".into(),
                    verdict: Label::Bug,
                    bug_probability: 0.92,
                    region: Some(Rect::new(1, 2, 30, 40)),
                    overlay_path: Some("overlays/a_overlay.png".into()),
                },
                ReportRow {
                    path: "b.png".into(),
                    verdict: Label::Clean,
                    bug_probability: 0.1,
                    region: None,
                    overlay_path: None,
                },
                ReportRow {
                    path: "c.png".into(),
                    verdict: Label::Clean,
                    bug_probability: 0.3,
                    region: None,
                    overlay_path: None,
                },
            ],
            skipped: vec![SkippedFile { path: "junk.png".into(), reason: "decode failed".into() }],
        }
    }

    #[test]
    fn json_round_trips_and_is_deterministic() {
        let doc = sample_doc();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("r1.json");
        let p2 = dir.path().join("r2.json");
        emit_report_json(&doc, &p1).unwrap();
        emit_report_json(&doc, &p2).unwrap();
        let b1 = std::fs::read(&p1).unwrap();
        let b2 = std::fs::read(&p2).unwrap();
        assert_eq!(b1, b2);
        let back = parse_report_json(std::str::from_utf8(&b1).unwrap()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn html_mentions_counts_and_every_row() {
        let doc = sample_doc();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.html");
        emit_report_html(&doc, &path).unwrap();
        let html = std::fs::read_to_string(&path).unwrap();
        assert!(html.contains("1 issues found in 3 screens"));
        for row in &doc.rows {
            assert!(html.contains(&row.path));
        }
        assert!(html.contains("overlays/a_overlay.png"));
        assert!(html.contains("junk.png"));
    }

    #[test]
    fn zero_issue_document_reports_zero() {
        let mut doc = sample_doc();
        doc.rows.retain(|r| r.verdict == Label::Clean);
        doc.num_screens = doc.rows.len();
        doc.num_issues = 0;
        doc.skipped.clear();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.html");
        emit_report_html(&doc, &path).unwrap();
        let html = std::fs::read_to_string(&path).unwrap();
        assert!(html.contains("0 issues"));
        assert!(!html.contains("Skipped"));
    }

    #[test]
    fn html_is_deterministic() {
        let doc = sample_doc();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("r1.html");
        let p2 = dir.path().join("r2.html");
        emit_report_html(&doc, &p1).unwrap();
        emit_report_html(&doc, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }
}
