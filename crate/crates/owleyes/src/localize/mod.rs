//! Grad-CAM issue localization.
//!
//! The class score (pre-softmax logit, seeded one-hot) is propagated back to
//! the final conv-block activation; spatially averaged gradients weight the
//! activation channels; the rectified combination, upsampled to the original
//! image, is the saliency heatmap.

mod overlay;

pub use overlay::{colormap, render_overlay};

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::model::{forward, head_backward, preprocess_image, Mode, Model};
use crate::tensor::{Scalar, Tensor4};
use image::RgbImage;
use std::path::Path;

/// Normalized saliency map in original-image coordinates. When every channel
/// contribution is negative the map is all zeros and `zero_saliency` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub w: usize,
    pub h: usize,
    /// Row-major, values in `[0, 1]`; the max is 1 unless `zero_saliency`.
    pub values: Vec<f32>,
    pub zero_saliency: bool,
}

/// Per-channel importance weights: the spatial mean of the class-score
/// gradient at the final conv activation.
#[derive(Debug, Clone, PartialEq)]
pub struct CamWeights<T> {
    pub alpha: Vec<T>,
}

impl Heatmap {
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.w + x]
    }

    /// Saliency peak position. Upsampling a coarse cell grid produces exact
    /// plateaus of the maximum (clamped interpolation repeats border cells
    /// outward), so ties are broken toward the map center: the centermost
    /// point of a border plateau is the source cell's own center, and unique
    /// interior peaks are returned as-is.
    pub fn argmax(&self) -> (usize, usize) {
        let max = self.values.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let (cx, cy) = (self.w as i64 / 2, self.h as i64 / 2);
        let mut best: Option<(usize, usize, i64)> = None;
        for y in 0..self.h {
            for x in 0..self.w {
                if self.at(x, y) == max {
                    let (dx, dy) = (x as i64 - cx, y as i64 - cy);
                    let dist = dx * dx + dy * dy;
                    if best.is_none_or(|(_, _, d)| dist < d) {
                        best = Some((x, y, dist));
                    }
                }
            }
        }
        let (x, y, _) = best.unwrap_or((0, 0, 0));
        (x, y)
    }

    /// Debug dump: `{"w":…,"h":…,"values":[…]}`.
    pub fn write_json(&self, path: &Path) -> Result<()> {
        #[derive(serde::Serialize)]
        struct Dump<'a> {
            w: usize,
            h: usize,
            values: &'a [f32],
        }
        let json = serde_json::to_string(&Dump { w: self.w, h: self.h, values: &self.values })
            .map_err(|e| Error::Parse(format!("heatmap json: {e}")))?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

/// Channel weights and the raw rectified map for a single-sample activation:
/// `alpha_k = mean_ij(grads[k])`, `map = relu(sum_k alpha_k * activations[k])`.
pub fn cam_weights_and_map<T: Scalar>(
    activations: &Tensor4<T>,
    grads: &Tensor4<T>,
) -> Result<(CamWeights<T>, Vec<T>)> {
    if activations.dims() != grads.dims() {
        return Err(Error::Dimension(format!(
            "cam: activation dims {:?} vs gradient dims {:?}",
            activations.dims(),
            grads.dims()
        )));
    }
    if activations.n() != 1 {
        return Err(Error::Argument("cam expects a single-sample activation".into()));
    }
    let (_, k, h, w) = activations.dims();
    let cells = T::from_f64((h * w) as f64);
    let mut alpha = Vec::with_capacity(k);
    for ch in 0..k {
        let sum: T = grads.channel(0, ch).iter().copied().sum();
        alpha.push(sum / cells);
    }
    let mut map = vec![T::zero(); h * w];
    for (ch, &a) in alpha.iter().enumerate() {
        for (m, &v) in map.iter_mut().zip(activations.channel(0, ch)) {
            *m += a * v;
        }
    }
    for m in map.iter_mut() {
        if *m < T::zero() {
            *m = T::zero();
        }
    }
    Ok((CamWeights { alpha }, map))
}

/// Bilinear upsample of a scalar plane (pixel-center convention, matching the
/// image resizer).
fn resize_plane(src: &[f32], sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<f32> {
    let mut out = vec![0.0f32; dw * dh];
    let scale_x = sw as f64 / dw as f64;
    let scale_y = sh as f64 / dh as f64;
    for y in 0..dh {
        let sy = ((y as f64 + 0.5) * scale_y - 0.5).clamp(0.0, sh as f64 - 1.0);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let fy = sy - y0 as f64;
        for x in 0..dw {
            let sx = ((x as f64 + 0.5) * scale_x - 0.5).clamp(0.0, sw as f64 - 1.0);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let fx = sx - x0 as f64;
            let top = src[y0 * sw + x0] as f64 * (1.0 - fx) + src[y0 * sw + x1] as f64 * fx;
            let bot = src[y1 * sw + x0] as f64 * (1.0 - fx) + src[y1 * sw + x1] as f64 * fx;
            out[y * dw + x] = (top * (1.0 - fy) + bot * fy) as f32;
        }
    }
    out
}

/// Counter-clockwise quarter turn of an `h×w` plane (undoes the clockwise
/// rotation applied to landscape screenshots during preprocessing).
fn rotate_ccw(src: &[f32], w: usize, h: usize) -> (Vec<f32>, usize, usize) {
    let (ow, oh) = (h, w);
    let mut out = vec![0.0f32; src.len()];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = src[c * w + (w - 1 - r)];
        }
    }
    (out, ow, oh)
}

/// Class-discriminative heatmap for `img`, in the image's own pixel grid.
/// `target` 0 = clean, 1 = bug.
pub fn grad_cam<T: Scalar>(model: &Model<T>, img: &RgbImage, target: usize) -> Result<Heatmap> {
    if target >= 2 {
        return Err(Error::Argument(format!("target class {target} out of range (0..2)")));
    }
    let x = preprocess_image::<T>(img, &model.config)?;
    let (_, cache) = forward(model, &x, Mode::Infer)?;
    let mut dlogits = vec![T::zero(); 2];
    dlogits[target] = T::one();
    let grads = head_backward(model, &cache, &dlogits)?;
    let (_, raw) = cam_weights_and_map(&cache.final_conv, &grads)?;

    let (_, _, mh, mw) = cache.final_conv.dims();
    let mut plane: Vec<f32> = raw.iter().map(|&v| v.to_f64() as f32).collect();
    let (mut pw, mut ph) = (mw, mh);
    if img.width() > img.height() {
        let (rot, w2, h2) = rotate_ccw(&plane, pw, ph);
        plane = rot;
        pw = w2;
        ph = h2;
    }
    let (dw, dh) = (img.width() as usize, img.height() as usize);
    let mut values = resize_plane(&plane, pw, ph, dw, dh);

    let max = values.iter().copied().fold(0.0f32, f32::max);
    let zero_saliency = max <= 0.0;
    if !zero_saliency {
        for v in values.iter_mut() {
            *v /= max;
        }
    } else {
        values.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(Heatmap { w: dw, h: dh, values, zero_saliency })
}

/// Tight bounding box of all cells with value ≥ `threshold`; `None` when no
/// cell qualifies.
pub fn heatmap_to_region(hm: &Heatmap, threshold: f32) -> Option<Rect> {
    let (mut min_x, mut min_y) = (usize::MAX, usize::MAX);
    let (mut max_x, mut max_y) = (0usize, 0usize);
    let mut any = false;
    for y in 0..hm.h {
        for x in 0..hm.w {
            if hm.at(x, y) >= threshold {
                any = true;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
            }
        }
    }
    any.then(|| {
        Rect::new(min_x as i32, min_y as i32, max_x as i32 + 1, max_y as i32 + 1)
    })
}
