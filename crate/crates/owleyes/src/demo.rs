//! Tiny synthetic app-screen generator.
//!
//! Real screenshot corpora are large and externally licensed, so the
//! runnable examples and the test-suite draw their inputs from this module:
//! seeded synthetic screens (status bar, text paragraphs, image panels,
//! buttons) paired with matching view-hierarchy JSON, plus a small screen
//! graph for the explorer. Same seed, same bytes.

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::raster::save_png;
use crate::rng::{mix_seed, SplitMix64};
use image::{Rgb, RgbImage};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct DemoOptions {
    pub screens: usize,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions { screens: 8, width: 360, height: 640, seed: 1 }
    }
}

fn fill_rect(img: &mut RgbImage, r: &Rect, color: [u8; 3]) {
    for y in r.top.max(0)..r.bottom.min(img.height() as i32) {
        for x in r.left.max(0)..r.right.min(img.width() as i32) {
            img.put_pixel(x as u32, y as u32, Rgb(color));
        }
    }
}

/// Horizontal dark strokes with word gaps, a stand-in for rendered text.
fn draw_text_strokes(img: &mut RgbImage, r: &Rect, rng: &mut SplitMix64, color: [u8; 3]) {
    let line_height = 10;
    let stroke = 3;
    let mut y = r.top + 3;
    while y + stroke <= r.bottom - 2 {
        let mut x = r.left + 3;
        while x < r.right - 4 {
            let word = 8 + rng.below(24) as i32;
            let end = (x + word).min(r.right - 3);
            fill_rect(img, &Rect::new(x, y, end, y + stroke), color);
            x = end + 4 + rng.below(6) as i32;
        }
        y += line_height;
    }
}

/// Gradient panel with a few filled disks, a stand-in for a photo.
fn draw_image_panel(img: &mut RgbImage, r: &Rect, rng: &mut SplitMix64) {
    let (c0, c1) = (
        [rng.below(200) as u8 + 30, rng.below(200) as u8 + 30, rng.below(200) as u8 + 30],
        [rng.below(200) as u8 + 30, rng.below(200) as u8 + 30, rng.below(200) as u8 + 30],
    );
    let height = r.height().max(1) as f64;
    for y in r.top..r.bottom {
        let t = (y - r.top) as f64 / height;
        let mix = |a: u8, b: u8| (a as f64 * (1.0 - t) + b as f64 * t) as u8;
        let row = [mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2])];
        fill_rect(img, &Rect::new(r.left, y, r.right, y + 1), row);
    }
    for _ in 0..3 {
        let radius = (4 + rng.below(r.width().min(r.height()) as usize / 4)) as i32;
        let cx = r.left + radius + rng.below((r.width() - 2 * radius).max(1) as usize) as i32;
        let cy = r.top + radius + rng.below((r.height() - 2 * radius).max(1) as usize) as i32;
        let color = [rng.below(256) as u8, rng.below(256) as u8, rng.below(256) as u8];
        for y in (cy - radius).max(r.top)..(cy + radius).min(r.bottom) {
            for x in (cx - radius).max(r.left)..(cx + radius).min(r.right) {
                let (dx, dy) = (x - cx, y - cy);
                if dx * dx + dy * dy <= radius * radius {
                    img.put_pixel(x as u32, y as u32, Rgb(color));
                }
            }
        }
    }
}

struct NodeSpec {
    class: &'static str,
    bounds: Rect,
}

/// One synthetic screen and its matching hierarchy JSON.
///
/// The image panel lands at a seeded position anywhere in the content area
/// (not a fixed slot), so detectors trained on injected panel defects must
/// learn position-independent, localized features.
pub fn demo_screen(width: u32, height: u32, seed: u64) -> (RgbImage, String) {
    let mut rng = SplitMix64::new(seed);
    let (w, h) = (width as i32, height as i32);
    let bg = [235 + rng.below(20) as u8, 235 + rng.below(20) as u8, 235 + rng.below(20) as u8];
    let mut img = RgbImage::from_pixel(width, height, Rgb(bg));
    let mut nodes: Vec<NodeSpec> = Vec::new();

    // Status/header bar with a title.
    let bar_h = h / 12;
    let bar_color = [40 + rng.below(120) as u8, 60 + rng.below(120) as u8, 120 + rng.below(120) as u8];
    fill_rect(&mut img, &Rect::new(0, 0, w, bar_h), bar_color);
    let title = Rect::new(w / 20, bar_h / 4, w / 2, bar_h * 3 / 4);
    draw_text_strokes(&mut img, &title, &mut rng, [250, 250, 250]);
    nodes.push(NodeSpec { class: "android.widget.TextView", bounds: title });

    let text_color = [30 + rng.below(40) as u8, 30 + rng.below(40) as u8, 30 + rng.below(40) as u8];

    // Footer caption.
    let foot = Rect::new(w / 20, h - h / 14, w - w / 3, h - h / 25);
    draw_text_strokes(&mut img, &foot, &mut rng, text_color);
    nodes.push(NodeSpec { class: "android.widget.TextView", bounds: foot });

    // Image panel first, anywhere in the content area.
    let content_top = bar_h + h / 40;
    let content_bottom = h - h / 12;
    let img_w = w * (52 + rng.below(26) as i32) / 100;
    let img_h = h * (34 + rng.below(12) as i32) / 100;
    let img_x = w / 20 + rng.below(((w - img_w - w / 10).max(1)) as usize) as i32;
    let img_y =
        content_top + rng.below(((content_bottom - content_top - img_h).max(1)) as usize) as i32;
    let panel = Rect::new(img_x, img_y, img_x + img_w, img_y + img_h);
    draw_image_panel(&mut img, &panel, &mut rng);
    nodes.push(NodeSpec { class: "android.widget.ImageView", bounds: panel });

    // Fill the space above and below the panel with paragraphs and a button.
    let mut button_placed = false;
    for (gap_top, gap_bottom) in [(content_top, panel.top - h / 60), (panel.bottom + h / 60, content_bottom)] {
        let mut y = gap_top;
        while gap_bottom - y >= h / 14 {
            let max_extra = ((gap_bottom - y - h / 14).min(h / 12).max(1)) as usize;
            if !button_placed && rng.below(3) == 0 {
                let btn_w = w / 3 + rng.below(w as usize / 6) as i32;
                let btn_h = h / 16;
                let btn_x = w / 20 + rng.below(((w - btn_w - w / 10).max(1)) as usize) as i32;
                let btn = Rect::new(btn_x, y, btn_x + btn_w, y + btn_h);
                let btn_color = [
                    60 + rng.below(140) as u8,
                    120 + rng.below(100) as u8,
                    60 + rng.below(140) as u8,
                ];
                fill_rect(&mut img, &btn, btn_color);
                let label = Rect::new(
                    btn.left + btn_w / 5,
                    btn.top + btn_h / 4,
                    btn.right - btn_w / 5,
                    btn.bottom - btn_h / 4,
                );
                draw_text_strokes(&mut img, &label, &mut rng, [255, 255, 255]);
                nodes.push(NodeSpec { class: "android.widget.Button", bounds: btn });
                button_placed = true;
                y = btn.bottom + h / 40;
            } else {
                let para_h = h / 16 + rng.below(max_extra) as i32;
                let para = Rect::new(w / 20, y, w - w / 20, (y + para_h).min(gap_bottom));
                draw_text_strokes(&mut img, &para, &mut rng, text_color);
                nodes.push(NodeSpec { class: "android.widget.TextView", bounds: para });
                y = para.bottom + h / 40;
            }
        }
    }

    let mut json = String::new();
    json.push_str("{\n  \"class\": \"android.widget.FrameLayout\",\n");
    let _ = writeln!(json, "  \"bounds\": [0, 0, {w}, {h}],");
    json.push_str("  \"children\": [\n");
    for (i, node) in nodes.iter().enumerate() {
        let b = node.bounds;
        let _ = write!(
            json,
            "    {{\"class\": \"{}\", \"bounds\": [{}, {}, {}, {}], \"visibility\": \"visible\"}}",
            node.class, b.left, b.top, b.right, b.bottom
        );
        json.push_str(if i + 1 < nodes.len() { ",\n" } else { "\n" });
    }
    json.push_str("  ]\n}\n");
    (img, json)
}

/// Writes `opts.screens` clean screens (PNG + hierarchy JSON) into `dir` and
/// returns the pairs. Screen `i` uses seed `mix_seed(opts.seed, i)`.
pub fn write_demo_corpus(dir: &Path, opts: &DemoOptions) -> Result<Vec<(PathBuf, PathBuf)>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut pairs = Vec::with_capacity(opts.screens);
    for i in 0..opts.screens {
        let (img, json) = demo_screen(opts.width, opts.height, mix_seed(opts.seed, i as u64));
        let img_path = dir.join(format!("screen_{i:03}.png"));
        let json_path = dir.join(format!("screen_{i:03}.json"));
        save_png(&img, &img_path)?;
        std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
        pairs.push((img_path, json_path));
    }
    Ok(pairs)
}

/// Writes a demo corpus plus an app-graph JSON over it (a seeded connected
/// graph: a spanning tree with a few extra edges). Returns the graph path.
pub fn write_demo_app_graph(dir: &Path, opts: &DemoOptions) -> Result<PathBuf> {
    let pairs = write_demo_corpus(dir, opts)?;
    let mut rng = SplitMix64::new(mix_seed(opts.seed, 0xA99));
    let n = pairs.len();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 1..n {
        edges.push((rng.below(i), i)); // spanning tree keeps everything reachable
    }
    for _ in 0..n / 2 {
        let a = rng.below(n);
        let b = rng.below(n);
        if a != b && !edges.contains(&(a, b)) {
            edges.push((a, b));
        }
    }
    edges.sort();

    let screen_id = |i: usize| format!("screen_{i:03}");
    let mut json = String::new();
    json.push_str("{\n");
    let _ = writeln!(json, "  \"start\": \"{}\",", screen_id(0));
    json.push_str("  \"screens\": {\n");
    for (i, (img, hier)) in pairs.iter().enumerate() {
        let _ = write!(
            json,
            "    \"{}\": {{\"screenshot\": \"{}\", \"hierarchy\": \"{}\"}}",
            screen_id(i),
            img.file_name().unwrap().to_string_lossy(),
            hier.file_name().unwrap().to_string_lossy()
        );
        json.push_str(if i + 1 < n { ",\n" } else { "\n" });
    }
    json.push_str("  },\n  \"edges\": {\n");
    let mut by_source: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (a, b) in edges {
        by_source.entry(a).or_default().push(b);
    }
    let sources: Vec<_> = by_source.keys().copied().collect();
    for (si, source) in sources.iter().enumerate() {
        let targets = &by_source[source];
        let list: Vec<String> = targets
            .iter()
            .map(|t| format!("{{\"action\": \"tap-{}\", \"to\": \"{}\"}}", screen_id(*t), screen_id(*t)))
            .collect();
        let _ = write!(json, "    \"{}\": [{}]", screen_id(*source), list.join(", "));
        json.push_str(if si + 1 < sources.len() { ",\n" } else { "\n" });
    }
    json.push_str("  }\n}\n");

    let graph_path = dir.join("app_graph.json");
    std::fs::write(&graph_path, json).map_err(|e| Error::io(&graph_path, e))?;
    Ok(graph_path)
}
