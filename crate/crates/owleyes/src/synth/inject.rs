//! The five issue-injection procedures.
//!
//! Every procedure is a pure function of `(image, hierarchy, category, seed)`
//! and touches no pixel outside the reported region (BlurredScreen's region
//! is the whole image).

use super::hierarchy::{select_with_rng, ViewHierarchy, Widget};
use super::{BugRecord, IssueCategory};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::raster::gaussian_blur;
use crate::rng::SplitMix64;
use image::RgbImage;

/// Placeholder fill for a missing image.
pub const MISSING_FILL: [u8; 3] = [0xCC, 0xCC, 0xCC];
/// Diagonal stroke color of the missing-image placeholder.
pub const MISSING_STROKE: [u8; 3] = [0x88, 0x88, 0x88];
/// Color of the rendered "null" text.
pub const NULL_TEXT_COLOR: [u8; 3] = [0x22, 0x22, 0x22];

/// 5×7 glyphs, one row per byte, bit 4 = leftmost column.
const GLYPH_N: [u8; 7] = [0b00000, 0b10000, 0b10110, 0b11001, 0b10001, 0b10001, 0b10001];
const GLYPH_U: [u8; 7] = [0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b10011, 0b01101];
const GLYPH_L: [u8; 7] = [0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110];

fn glyph(ch: char) -> &'static [u8; 7] {
    match ch {
        'n' => &GLYPH_N,
        'u' => &GLYPH_U,
        'l' => &GLYPH_L,
        _ => unreachable!("only the literal text \"null\" is rendered"),
    }
}

/// Injects `cat` into a copy of `img`. The returned [`BugRecord`] carries the
/// category, region and seed; source/output paths are left empty for the
/// dataset generator to fill in.
pub fn inject_issue(
    img: &RgbImage,
    h: &ViewHierarchy,
    cat: IssueCategory,
    seed: u64,
) -> Result<(RgbImage, BugRecord)> {
    if img.width() != h.screen_w || img.height() != h.screen_h {
        return Err(Error::Dimension(format!(
            "inject_issue: image is {}x{} but hierarchy declares {}x{}",
            img.width(),
            img.height(),
            h.screen_w,
            h.screen_h
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let target = select_with_rng(h, cat, &mut rng)?;
    let (out, region) = match cat {
        IssueCategory::ComponentOcclusion => occlude(img, h, &target, &mut rng),
        IssueCategory::TextOverlap => overlap_text(img, &target, &mut rng),
        IssueCategory::MissingImage => missing_image(img, &target.bounds),
        IssueCategory::NullValue => null_value(img, &target.bounds),
        IssueCategory::BlurredScreen => blur_screen(img)?,
    };
    debug_assert!(!region.is_empty());
    Ok((
        out,
        BugRecord {
            source_path: Default::default(),
            output_path: Default::default(),
            category: cat,
            region,
            seed,
        },
    ))
}

/// Copies the `src` rect of the original pixels to position `(dst_x, dst_y)`.
fn paste_rect(img: &mut RgbImage, original: &RgbImage, src: &Rect, dst_x: i32, dst_y: i32) {
    for y in 0..src.height() {
        for x in 0..src.width() {
            let px = *original.get_pixel((src.left + x) as u32, (src.top + y) as u32);
            img.put_pixel((dst_x + x) as u32, (dst_y + y) as u32, px);
        }
    }
}

/// Shift a rect by `(dx, dy)` but keep it fully inside the image.
fn shifted_within(bounds: &Rect, dx: i32, dy: i32, w: u32, h: u32) -> (i32, i32) {
    let x = (bounds.left + dx).clamp(0, w as i32 - bounds.width());
    let y = (bounds.top + dy).clamp(0, h as i32 - bounds.height());
    (x, y)
}

fn occlude(
    img: &RgbImage,
    h: &ViewHierarchy,
    target: &Widget,
    rng: &mut SplitMix64,
) -> (RgbImage, Rect) {
    let b = target.bounds;
    let (cx, cy) = b.center();
    // Displace toward the nearest other widget (screen center when alone).
    let toward = h
        .widgets()
        .iter()
        .filter(|w| w.bounds != b)
        .map(|w| {
            let (wx, wy) = w.bounds.center();
            ((wx - cx) * (wx - cx) + (wy - cy) * (wy - cy), (wx, wy))
        })
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .map(|(_, c)| c)
        .unwrap_or_else(|| h.screen_rect().center());

    let fx = rng.uniform(0.3, 0.6);
    let fy = rng.uniform(0.3, 0.6);
    let sign = |d: f64| if d < 0.0 { -1 } else { 1 };
    let mut dx = sign(toward.0 - cx) * ((fx * b.width() as f64).round() as i32);
    let dy = sign(toward.1 - cy) * ((fy * b.height() as f64).round() as i32);
    if dx == 0 && dy == 0 {
        dx = 1; // 1px floor keeps the copy from landing exactly on itself
    }
    let (px, py) = shifted_within(&b, dx, dy, img.width(), img.height());

    let mut out = img.clone();
    paste_rect(&mut out, img, &b, px, py);
    let pasted = Rect::new(px, py, px + b.width(), py + b.height());
    (out, b.union(&pasted))
}

fn overlap_text(img: &RgbImage, target: &Widget, rng: &mut SplitMix64) -> (RgbImage, Rect) {
    let b = target.bounds;
    let f = rng.uniform(0.4, 0.6);
    let magnitude = ((f * b.height() as f64).round() as i32).max(1);
    let dy = if rng.flip() { magnitude } else { -magnitude };
    let (px, py) = shifted_within(&b, 0, dy, img.width(), img.height());

    let mut out = img.clone();
    paste_rect(&mut out, img, &b, px, py);
    let pasted = Rect::new(px, py, px + b.width(), py + b.height());
    (out, b.union(&pasted))
}

fn missing_image(img: &RgbImage, r: &Rect) -> (RgbImage, Rect) {
    let mut out = img.clone();
    for y in r.top..r.bottom {
        for x in r.left..r.right {
            out.put_pixel(x as u32, y as u32, image::Rgb(MISSING_FILL));
        }
    }
    // Both diagonals as 2px-wide bands: paint pixels whose center lies within
    // distance 1 of the corner-to-corner lines.
    let (w, h) = ((r.width() - 1) as f64, (r.height() - 1) as f64);
    let norm = (w * w + h * h).sqrt().max(1.0);
    for y in r.top..r.bottom {
        for x in r.left..r.right {
            let (lx, ly) = ((x - r.left) as f64, (y - r.top) as f64);
            // Main diagonal (0,0)→(w,h): |h*lx - w*ly| / |(w,h)|.
            let d1 = (h * lx - w * ly).abs() / norm;
            // Anti-diagonal (w,0)→(0,h): |h*(lx-w) + w*ly| / |(w,h)|.
            let d2 = (h * (lx - w) + w * ly).abs() / norm;
            if d1 <= 1.0 || d2 <= 1.0 {
                out.put_pixel(x as u32, y as u32, image::Rgb(MISSING_STROKE));
            }
        }
    }
    (out, *r)
}

/// Per-channel median of the rect's 1px outer border (clamped to the image);
/// the fill a "null" label would sit on.
fn border_median(img: &RgbImage, r: &Rect) -> [u8; 3] {
    let mut samples: [Vec<u8>; 3] = Default::default();
    let add = |x: i32, y: i32, samples: &mut [Vec<u8>; 3]| {
        if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
            let p = img.get_pixel(x as u32, y as u32).0;
            for ch in 0..3 {
                samples[ch].push(p[ch]);
            }
        }
    };
    for x in (r.left - 1)..=r.right {
        add(x, r.top - 1, &mut samples);
        add(x, r.bottom, &mut samples);
    }
    for y in r.top..r.bottom {
        add(r.left - 1, y, &mut samples);
        add(r.right, y, &mut samples);
    }
    let mut out = [0xFFu8; 3];
    for ch in 0..3 {
        if samples[ch].is_empty() {
            continue;
        }
        samples[ch].sort_unstable();
        out[ch] = samples[ch][samples[ch].len() / 2];
    }
    out
}

fn null_value(img: &RgbImage, r: &Rect) -> (RgbImage, Rect) {
    let bg = border_median(img, r);
    let mut out = img.clone();
    for y in r.top..r.bottom {
        for x in r.left..r.right {
            out.put_pixel(x as u32, y as u32, image::Rgb(bg));
        }
    }
    // "null" from the 5×7 font, nearest-neighbor scaled to ~60% of the rect
    // height, left-aligned and vertically centered, clipped to the rect.
    let scale = (((0.6 * r.height() as f64) / 7.0).round() as i32).max(1);
    let y0 = r.top + ((r.height() - 7 * scale) / 2).max(0);
    let mut x0 = r.left;
    for ch in "null".chars() {
        let g = glyph(ch);
        for (row, bits) in g.iter().enumerate() {
            for col in 0..5 {
                if bits & (1 << (4 - col)) == 0 {
                    continue;
                }
                for sy in 0..scale {
                    for sx in 0..scale {
                        let x = x0 + col * scale + sx;
                        let y = y0 + row as i32 * scale + sy;
                        if r.contains(x, y) {
                            out.put_pixel(x as u32, y as u32, image::Rgb(NULL_TEXT_COLOR));
                        }
                    }
                }
            }
        }
        x0 += 6 * scale; // 5 columns + 1 spacing
    }
    (out, *r)
}

fn blur_screen(img: &RgbImage) -> Result<(RgbImage, Rect)> {
    let sigma = img.width() as f64 / 100.0;
    let out = gaussian_blur(img, sigma)?;
    let region = Rect::new(0, 0, img.width() as i32, img.height() as i32);
    Ok((out, region))
}
