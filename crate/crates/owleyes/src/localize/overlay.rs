//! Heatmap rendering: blue→red colormap and alpha blending over screenshots.

use super::Heatmap;
use crate::error::{Error, Result};
use image::RgbImage;

/// Piecewise-linear blue→red map with stops at 0, 0.25, 0.5, 0.75, 1:
/// blue, cyan, green, yellow, red. Input is clamped to `[0, 1]`.
pub fn colormap(v: f32) -> [u8; 3] {
    const STOPS: [[f32; 3]; 5] = [
        [0.0, 0.0, 255.0],
        [0.0, 255.0, 255.0],
        [0.0, 255.0, 0.0],
        [255.0, 255.0, 0.0],
        [255.0, 0.0, 0.0],
    ];
    let v = v.clamp(0.0, 1.0);
    let scaled = v * 4.0;
    let i = (scaled.floor() as usize).min(3);
    let f = scaled - i as f32;
    let mut out = [0u8; 3];
    for ch in 0..3 {
        let mixed = STOPS[i][ch] * (1.0 - f) + STOPS[i + 1][ch] * f;
        out[ch] = (mixed + 0.5).clamp(0.0, 255.0) as u8;
    }
    out
}

/// Per-pixel blend `out = (1 - alpha) * img + alpha * colormap(heatmap)`.
/// The heatmap must already be at image resolution.
pub fn render_overlay(img: &RgbImage, hm: &Heatmap, alpha: f32) -> Result<RgbImage> {
    if hm.w != img.width() as usize || hm.h != img.height() as usize {
        return Err(Error::Dimension(format!(
            "render_overlay: heatmap {}x{} vs image {}x{}",
            hm.w,
            hm.h,
            img.width(),
            img.height()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Argument(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let mut out = RgbImage::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let base = img.get_pixel(x, y).0;
            let heat = colormap(hm.at(x as usize, y as usize));
            let mut px = [0u8; 3];
            for ch in 0..3 {
                let v = (1.0 - alpha) * base[ch] as f32 + alpha * heat[ch] as f32;
                px[ch] = (v + 0.5).clamp(0.0, 255.0) as u8;
            }
            out.put_pixel(x, y, image::Rgb(px));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_heatmap(w: usize, h: usize) -> Heatmap {
        let values = (0..w * h).map(|i| i as f32 / (w * h - 1) as f32).collect();
        Heatmap { w, h, values, zero_saliency: false }
    }

    #[test]
    fn colormap_endpoints_and_midpoint() {
        assert_eq!(colormap(0.0), [0, 0, 255]);
        assert_eq!(colormap(0.5), [0, 255, 0]);
        assert_eq!(colormap(1.0), [255, 0, 0]);
        assert_eq!(colormap(-3.0), [0, 0, 255]);
        assert_eq!(colormap(7.0), [255, 0, 0]);
    }

    #[test]
    fn alpha_zero_is_byte_identical() {
        let img = RgbImage::from_fn(8, 6, |x, y| image::Rgb([x as u8 * 30, y as u8 * 40, 77]));
        let hm = ramp_heatmap(8, 6);
        let out = render_overlay(&img, &hm, 0.0).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn alpha_one_is_pure_colormap() {
        let img = RgbImage::from_pixel(4, 4, image::Rgb([10, 20, 30]));
        let hm = ramp_heatmap(4, 4);
        let out = render_overlay(&img, &hm, 1.0).unwrap();
        for y in 0..4usize {
            for x in 0..4usize {
                assert_eq!(out.get_pixel(x as u32, y as u32).0, colormap(hm.at(x, y)));
            }
        }
    }

    #[test]
    fn output_dims_match_input() {
        let img = RgbImage::new(9, 5);
        let hm = Heatmap { w: 9, h: 5, values: vec![0.3; 45], zero_saliency: false };
        let out = render_overlay(&img, &hm, 0.5).unwrap();
        assert_eq!((out.width(), out.height()), (9, 5));
    }

    #[test]
    fn dims_mismatch_is_rejected() {
        let img = RgbImage::new(4, 4);
        let hm = ramp_heatmap(5, 4);
        assert!(matches!(render_overlay(&img, &hm, 0.5), Err(Error::Dimension(_))));
    }
}
