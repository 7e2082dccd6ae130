//! 2×2 max pooling with stride 2.
//!
//! The forward pass records which window element won so the backward pass can
//! route gradients exactly. Ties go to the first element in row-major window
//! order (top-left first).

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor4};

/// Per-output-cell winner index within its 2×2 window, row-major:
/// 0 = top-left, 1 = top-right, 2 = bottom-left, 3 = bottom-right.
#[derive(Debug, Clone)]
pub struct PoolContext {
    input_dims: (usize, usize, usize, usize),
    argmax: Vec<u8>,
}

impl PoolContext {
    pub fn input_dims(&self) -> (usize, usize, usize, usize) {
        self.input_dims
    }

    pub fn argmax(&self) -> &[u8] {
        &self.argmax
    }
}

pub fn maxpool2x2<T: Scalar>(x: &Tensor4<T>) -> Result<(Tensor4<T>, PoolContext)> {
    let (n, c, h, w) = x.dims();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::Dimension(format!(
            "maxpool2x2 needs even spatial dims, got {h}x{w}"
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut y = Tensor4::zeros(n, c, oh, ow);
    let mut argmax = vec![0u8; n * c * oh * ow];
    let mut out_i = 0;
    for ni in 0..n {
        for ci in 0..c {
            let plane = x.channel(ni, ci);
            for oy in 0..oh {
                for ox in 0..ow {
                    let base = (2 * oy) * w + 2 * ox;
                    let window = [plane[base], plane[base + 1], plane[base + w], plane[base + w + 1]];
                    let mut best = 0usize;
                    for k in 1..4 {
                        if window[k] > window[best] {
                            best = k;
                        }
                    }
                    y.data_mut()[out_i] = window[best];
                    argmax[out_i] = best as u8;
                    out_i += 1;
                }
            }
        }
    }
    Ok((y, PoolContext { input_dims: (n, c, h, w), argmax }))
}

/// Routes each `dy` element to its recorded argmax position; every other
/// input position receives zero, so gradient mass is conserved.
pub fn maxpool2x2_backward<T: Scalar>(ctx: &PoolContext, dy: &Tensor4<T>) -> Result<Tensor4<T>> {
    let (n, c, h, w) = ctx.input_dims;
    if dy.dims() != (n, c, h / 2, w / 2) {
        return Err(Error::Dimension(format!(
            "maxpool2x2_backward: dy dims {:?} do not match pooled dims {:?}",
            dy.dims(),
            (n, c, h / 2, w / 2)
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut dx = Tensor4::zeros(n, c, h, w);
    let mut out_i = 0;
    for ni in 0..n {
        for ci in 0..c {
            let plane_base = (ni * c + ci) * h * w;
            for oy in 0..oh {
                for ox in 0..ow {
                    let k = ctx.argmax[out_i] as usize;
                    let (dy_in_win, dx_in_win) = (k / 2, k % 2);
                    let pos = plane_base + (2 * oy + dy_in_win) * w + 2 * ox + dx_in_win;
                    dx.data_mut()[pos] += dy.data()[out_i];
                    out_i += 1;
                }
            }
        }
    }
    Ok(dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Brute-force pooling over explicit window coordinates.
    fn reference_pool(x: &Tensor4<f64>) -> Tensor4<f64> {
        let (n, c, h, w) = x.dims();
        let mut y = Tensor4::zeros(n, c, h / 2, w / 2);
        for ni in 0..n {
            for ci in 0..c {
                for oy in 0..h / 2 {
                    for ox in 0..w / 2 {
                        let mut best = f64::NEG_INFINITY;
                        for dy in 0..2 {
                            for dx in 0..2 {
                                best = best.max(x.get(ni, ci, 2 * oy + dy, 2 * ox + dx));
                            }
                        }
                        y.set(ni, ci, oy, ox, best);
                    }
                }
            }
        }
        y
    }

    #[test]
    fn single_window_forward_and_backward() {
        let x = Tensor4::from_vec(1, 1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (y, ctx) = maxpool2x2(&x).unwrap();
        assert_eq!(y.data(), &[4.0]);
        let dy = Tensor4::from_vec(1, 1, 1, 1, vec![1.0]).unwrap();
        let dx = maxpool2x2_backward(&ctx, &dy).unwrap();
        assert_eq!(dx.data(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn ramp_matches_reference() {
        let x = Tensor4::from_vec(1, 1, 4, 4, (0..16).map(f64::from).collect()).unwrap();
        let (y, _) = maxpool2x2(&x).unwrap();
        assert_eq!(y.data(), reference_pool(&x).data());
        assert_eq!(y.data(), &[5.0, 7.0, 13.0, 15.0]);
    }

    #[test]
    fn all_equal_window_routes_to_top_left() {
        let x = Tensor4::<f64>::filled(1, 1, 2, 2, 3.0);
        let (_, ctx) = maxpool2x2(&x).unwrap();
        assert_eq!(ctx.argmax(), &[0]);
        let dy = Tensor4::from_vec(1, 1, 1, 1, vec![2.5]).unwrap();
        let dx = maxpool2x2_backward(&ctx, &dy).unwrap();
        assert_eq!(dx.data(), &[2.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn odd_dims_are_rejected() {
        let x = Tensor4::<f64>::zeros(1, 1, 3, 4);
        assert!(matches!(maxpool2x2(&x), Err(crate::error::Error::Dimension(_))));
        let x = Tensor4::<f64>::zeros(1, 1, 4, 5);
        assert!(maxpool2x2(&x).is_err());
    }

    #[test]
    fn matches_reference_on_random_tensors() {
        let mut rng = SplitMix64::new(0xBEEF);
        for _ in 0..100 {
            let (n, c) = (1 + rng.below(2), 1 + rng.below(3));
            let (h, w) = (2 * (1 + rng.below(3)), 2 * (1 + rng.below(3)));
            let data = (0..n * c * h * w).map(|_| rng.uniform(-5.0, 5.0)).collect();
            let x = Tensor4::from_vec(n, c, h, w, data).unwrap();
            let (y, _) = maxpool2x2(&x).unwrap();
            let r = reference_pool(&x);
            for (a, b) in y.data().iter().zip(r.data()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn backward_conserves_gradient_mass() {
        let mut rng = SplitMix64::new(0xABCD);
        for _ in 0..50 {
            let (h, w) = (2 * (1 + rng.below(4)), 2 * (1 + rng.below(4)));
            let data = (0..2 * h * w).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let x = Tensor4::from_vec(1, 2, h, w, data).unwrap();
            let (_, ctx) = maxpool2x2(&x).unwrap();
            let dy_data: Vec<f64> =
                (0..2 * (h / 2) * (w / 2)).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let dy = Tensor4::from_vec(1, 2, h / 2, w / 2, dy_data).unwrap();
            let dx = maxpool2x2_backward(&ctx, &dy).unwrap();
            let sum_dy: f64 = dy.data().iter().sum();
            let sum_dx: f64 = dx.data().iter().sum();
            assert!((sum_dy - sum_dx).abs() <= 1e-12);
        }
    }
}
