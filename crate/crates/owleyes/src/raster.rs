//! Pixel-level raster operations on RGB images.
//!
//! Resize and blur are written out here rather than delegated so their exact
//! semantics (sampling convention, kernel truncation, rounding) stay pinned
//! and reproducible.

use crate::error::{Error, Result};
use image::RgbImage;
use std::path::Path;

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?;
    Ok(img.to_rgb8())
}

pub fn save_png(img: &RgbImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::image(path, e))
}

/// Bilinear resample with pixel-center alignment: destination pixel `(x, y)`
/// samples the source at `((x + 0.5) * sw / dw - 0.5, (y + 0.5) * sh / dh - 0.5)`,
/// clamped to the image, blending the four surrounding texels.
pub fn bilinear_resize(src: &RgbImage, dst_w: u32, dst_h: u32) -> Result<RgbImage> {
    if src.width() == 0 || src.height() == 0 || dst_w == 0 || dst_h == 0 {
        return Err(Error::Argument("bilinear_resize: zero-dimension image".into()));
    }
    if src.width() == dst_w && src.height() == dst_h {
        return Ok(src.clone());
    }
    let (sw, sh) = (src.width() as f64, src.height() as f64);
    let scale_x = sw / dst_w as f64;
    let scale_y = sh / dst_h as f64;
    let mut out = RgbImage::new(dst_w, dst_h);
    for y in 0..dst_h {
        let sy = ((y as f64 + 0.5) * scale_y - 0.5).clamp(0.0, sh - 1.0);
        let y0 = sy.floor() as u32;
        let y1 = (y0 + 1).min(src.height() - 1);
        let fy = sy - y0 as f64;
        for x in 0..dst_w {
            let sx = ((x as f64 + 0.5) * scale_x - 0.5).clamp(0.0, sw - 1.0);
            let x0 = sx.floor() as u32;
            let x1 = (x0 + 1).min(src.width() - 1);
            let fx = sx - x0 as f64;
            let p00 = src.get_pixel(x0, y0).0;
            let p10 = src.get_pixel(x1, y0).0;
            let p01 = src.get_pixel(x0, y1).0;
            let p11 = src.get_pixel(x1, y1).0;
            let mut px = [0u8; 3];
            for ch in 0..3 {
                let top = p00[ch] as f64 * (1.0 - fx) + p10[ch] as f64 * fx;
                let bot = p01[ch] as f64 * (1.0 - fx) + p11[ch] as f64 * fx;
                let v = top * (1.0 - fy) + bot * fy;
                px[ch] = (v + 0.5).clamp(0.0, 255.0) as u8;
            }
            out.put_pixel(x, y, image::Rgb(px));
        }
    }
    Ok(out)
}

/// Separable Gaussian blur with the kernel truncated at 3 sigma and
/// renormalized; borders are handled by clamping (edge replication).
pub fn gaussian_blur(src: &RgbImage, sigma: f64) -> Result<RgbImage> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Argument(format!("gaussian_blur: sigma must be positive, got {sigma}")));
    }
    let (w, h) = (src.width() as i64, src.height() as i64);
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for i in -radius..=radius {
        kernel.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for k in kernel.iter_mut() {
        *k /= norm;
    }

    // Horizontal pass into a float buffer, vertical pass back to bytes.
    let mut tmp = vec![0.0f64; (w * h * 3) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for (ki, k) in kernel.iter().enumerate() {
                let sx = (x + ki as i64 - radius).clamp(0, w - 1);
                let p = src.get_pixel(sx as u32, y as u32).0;
                for ch in 0..3 {
                    acc[ch] += k * p[ch] as f64;
                }
            }
            let base = ((y * w + x) * 3) as usize;
            tmp[base..base + 3].copy_from_slice(&acc);
        }
    }
    let mut out = RgbImage::new(src.width(), src.height());
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for (ki, k) in kernel.iter().enumerate() {
                let sy = (y + ki as i64 - radius).clamp(0, h - 1);
                let base = ((sy * w + x) * 3) as usize;
                for ch in 0..3 {
                    acc[ch] += k * tmp[base + ch];
                }
            }
            let px = [
                (acc[0] + 0.5).clamp(0.0, 255.0) as u8,
                (acc[1] + 0.5).clamp(0.0, 255.0) as u8,
                (acc[2] + 0.5).clamp(0.0, 255.0) as u8,
            ];
            out.put_pixel(x as u32, y as u32, image::Rgb(px));
        }
    }
    Ok(out)
}
