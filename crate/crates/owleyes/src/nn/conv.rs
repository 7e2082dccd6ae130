//! 3×3 convolution (cross-correlation), stride 1, zero padding 1.
//!
//! Spatial dims are preserved; only pooling layers downsample. Forward and
//! backward both run over a zero-padded copy of the input so the inner loops
//! are branch-free and contiguous.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::tensor::{Scalar, Tensor4};
use rayon::prelude::*;

pub const KERNEL: usize = 3;
const PAD: usize = 1;

/// Learnable filters of one convolutional layer: `(out_ch, in_ch, 3, 3)`
/// kernels plus one bias per output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams<T> {
    pub out_ch: usize,
    pub in_ch: usize,
    pub kernels: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> ConvParams<T> {
    pub fn zeros(out_ch: usize, in_ch: usize) -> Self {
        ConvParams {
            out_ch,
            in_ch,
            kernels: vec![T::zero(); out_ch * in_ch * KERNEL * KERNEL],
            bias: vec![T::zero(); out_ch],
        }
    }

    /// Fan-in-scaled uniform init: kernels in ±sqrt(6/fan_in), bias zero.
    pub fn init(out_ch: usize, in_ch: usize, rng: &mut SplitMix64) -> Self {
        let mut p = Self::zeros(out_ch, in_ch);
        let bound = (6.0 / (in_ch * KERNEL * KERNEL) as f64).sqrt();
        for k in p.kernels.iter_mut() {
            *k = T::from_f64(rng.uniform(-bound, bound));
        }
        p
    }

    #[inline]
    fn kernel_at(&self, oc: usize, ic: usize, ky: usize, kx: usize) -> T {
        self.kernels[((oc * self.in_ch + ic) * KERNEL + ky) * KERNEL + kx]
    }

    pub fn convert<U: Scalar>(&self) -> ConvParams<U>
    where
        T: Scalar,
    {
        ConvParams {
            out_ch: self.out_ch,
            in_ch: self.in_ch,
            kernels: self.kernels.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
            bias: self.bias.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
        }
    }
}

/// Gradients returned by [`conv2d_backward`].
#[derive(Debug, Clone)]
pub struct ConvGrads<T> {
    pub dx: Tensor4<T>,
    pub dkernels: Vec<T>,
    pub dbias: Vec<T>,
}

fn check_channels<T: Scalar>(x: &Tensor4<T>, p: &ConvParams<T>) -> Result<()> {
    if x.c() != p.in_ch {
        return Err(Error::Dimension(format!(
            "conv2d: input has {} channels, params expect {}",
            x.c(),
            p.in_ch
        )));
    }
    Ok(())
}

/// Zero-pad one sample into a `(c, h+2, w+2)` buffer.
fn pad_sample<T: Scalar>(x: &Tensor4<T>, n: usize) -> Vec<T> {
    let (_, c, h, w) = x.dims();
    let (ph, pw) = (h + 2 * PAD, w + 2 * PAD);
    let mut out = vec![T::zero(); c * ph * pw];
    for ci in 0..c {
        let src = x.channel(n, ci);
        for y in 0..h {
            let dst = (ci * ph + y + PAD) * pw + PAD;
            out[dst..dst + w].copy_from_slice(&src[y * w..y * w + w]);
        }
    }
    out
}

/// Forward pass: `y[n,oc] = bias[oc] + sum_ic x[n,ic] ⋆ kernels[oc,ic]`.
pub fn conv2d<T: Scalar>(x: &Tensor4<T>, p: &ConvParams<T>) -> Result<Tensor4<T>> {
    check_channels(x, p)?;
    let (n, c, h, w) = x.dims();
    let pw = w + 2 * PAD;
    let padded: Vec<Vec<T>> = (0..n).map(|ni| pad_sample(x, ni)).collect();

    let mut y = Tensor4::zeros(n, p.out_ch, h, w);
    // Each (sample, out-channel) plane is written by exactly one task, and the
    // accumulation order within a plane is fixed, so the result does not
    // depend on the thread count.
    y.data_mut()
        .par_chunks_mut(h * w)
        .enumerate()
        .for_each(|(chunk, out)| {
            let ni = chunk / p.out_ch;
            let oc = chunk % p.out_ch;
            let pad = &padded[ni];
            out.fill(p.bias[oc]);
            for ic in 0..c {
                let plane = &pad[ic * (h + 2 * PAD) * pw..];
                for ky in 0..KERNEL {
                    for kx in 0..KERNEL {
                        let k = p.kernel_at(oc, ic, ky, kx);
                        if k == T::zero() {
                            continue;
                        }
                        for oy in 0..h {
                            let src = &plane[(oy + ky) * pw + kx..(oy + ky) * pw + kx + w];
                            let dst = &mut out[oy * w..oy * w + w];
                            for (d, s) in dst.iter_mut().zip(src) {
                                *d += k * *s;
                            }
                        }
                    }
                }
            }
        });
    Ok(y)
}

/// Backward pass; gradients match the finite-difference oracle (see tests).
pub fn conv2d_backward<T: Scalar>(
    x: &Tensor4<T>,
    p: &ConvParams<T>,
    dy: &Tensor4<T>,
) -> Result<ConvGrads<T>> {
    check_channels(x, p)?;
    if dy.dims() != (x.n(), p.out_ch, x.h(), x.w()) {
        return Err(Error::Dimension(format!(
            "conv2d_backward: dy dims {:?} do not match output dims {:?}",
            dy.dims(),
            (x.n(), p.out_ch, x.h(), x.w())
        )));
    }
    let (n, c, h, w) = x.dims();
    let (ph, pw) = (h + 2 * PAD, w + 2 * PAD);
    let padded: Vec<Vec<T>> = (0..n).map(|ni| pad_sample(x, ni)).collect();

    // dbias[oc] = sum over (n, y, x) of dy.
    let dbias: Vec<T> = (0..p.out_ch)
        .map(|oc| (0..n).map(|ni| dy.channel(ni, oc).iter().copied().sum::<T>()).sum())
        .collect();

    // dkernels[oc,ic,ky,kx] = sum over (n, oy, ox) of dy * padded_x.
    let mut dkernels = vec![T::zero(); p.kernels.len()];
    dkernels
        .par_chunks_mut(c * KERNEL * KERNEL)
        .enumerate()
        .for_each(|(oc, dk)| {
            for (ni, pad) in padded.iter().enumerate() {
                let g = dy.channel(ni, oc);
                for ic in 0..c {
                    let plane = &pad[ic * ph * pw..];
                    for ky in 0..KERNEL {
                        for kx in 0..KERNEL {
                            let mut acc = T::zero();
                            for oy in 0..h {
                                let src = &plane[(oy + ky) * pw + kx..(oy + ky) * pw + kx + w];
                                let gr = &g[oy * w..oy * w + w];
                                for (s, gv) in src.iter().zip(gr) {
                                    acc += *s * *gv;
                                }
                            }
                            dk[(ic * KERNEL + ky) * KERNEL + kx] += acc;
                        }
                    }
                }
            }
        });

    // dx: scatter dy through each kernel tap into a padded buffer, then crop.
    let mut dx = Tensor4::zeros(n, c, h, w);
    let sample_len = c * h * w;
    dx.data_mut()
        .par_chunks_mut(sample_len)
        .enumerate()
        .for_each(|(ni, dxs)| {
            let mut dpad = vec![T::zero(); c * ph * pw];
            for oc in 0..p.out_ch {
                let g = dy.channel(ni, oc);
                for ic in 0..c {
                    let plane = &mut dpad[ic * ph * pw..(ic + 1) * ph * pw];
                    for ky in 0..KERNEL {
                        for kx in 0..KERNEL {
                            let k = p.kernel_at(oc, ic, ky, kx);
                            if k == T::zero() {
                                continue;
                            }
                            for oy in 0..h {
                                let dst = &mut plane[(oy + ky) * pw + kx..(oy + ky) * pw + kx + w];
                                let gr = &g[oy * w..oy * w + w];
                                for (d, gv) in dst.iter_mut().zip(gr) {
                                    *d += k * *gv;
                                }
                            }
                        }
                    }
                }
            }
            for ic in 0..c {
                for y in 0..h {
                    let src = (ic * ph + y + PAD) * pw + PAD;
                    let dst = ic * h * w + y * w;
                    dxs[dst..dst + w].copy_from_slice(&dpad[src..src + w]);
                }
            }
        });

    Ok(ConvGrads { dx, dkernels, dbias })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{finite_difference_oracle, max_relative_error};

    /// Literal definition of padded cross-correlation, kept free of the
    /// buffering tricks used by the real kernel.
    pub(crate) fn reference_conv2d<T: Scalar>(x: &Tensor4<T>, p: &ConvParams<T>) -> Tensor4<T> {
        let (n, c, h, w) = x.dims();
        let mut y = Tensor4::zeros(n, p.out_ch, h, w);
        for ni in 0..n {
            for oc in 0..p.out_ch {
                for oy in 0..h {
                    for ox in 0..w {
                        let mut acc = p.bias[oc];
                        for ic in 0..c {
                            for ky in 0..KERNEL {
                                for kx in 0..KERNEL {
                                    let iy = oy as isize + ky as isize - 1;
                                    let ix = ox as isize + kx as isize - 1;
                                    if iy >= 0 && iy < h as isize && ix >= 0 && ix < w as isize {
                                        acc += x.get(ni, ic, iy as usize, ix as usize)
                                            * p.kernel_at(oc, ic, ky, kx);
                                    }
                                }
                            }
                        }
                        y.set(ni, oc, oy, ox, acc);
                    }
                }
            }
        }
        y
    }

    fn random_tensor(rng: &mut SplitMix64, n: usize, c: usize, h: usize, w: usize) -> Tensor4<f64> {
        let data = (0..n * c * h * w).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Tensor4::from_vec(n, c, h, w, data).unwrap()
    }

    #[test]
    fn identity_kernel_passes_input_through() {
        let x = Tensor4::from_vec(1, 1, 3, 3, (1..=9).map(f64::from).collect()).unwrap();
        let mut p = ConvParams::zeros(1, 1);
        p.kernels[4] = 1.0; // center tap
        let y = conv2d(&x, &p).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn all_ones_kernel_on_2x2() {
        let x = Tensor4::from_vec(1, 1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = ConvParams { out_ch: 1, in_ch: 1, kernels: vec![1.0; 9], bias: vec![0.0] };
        let y = conv2d(&x, &p).unwrap();
        assert_eq!(y.data(), &[10.0, 10.0, 10.0, 10.0]);
    }

    #[test]
    fn zero_kernels_emit_bias() {
        let x = Tensor4::<f64>::filled(1, 2, 3, 3, 5.0);
        let mut p = ConvParams::zeros(2, 2);
        p.bias = vec![0.7, 0.7];
        let y = conv2d(&x, &p).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.7));
    }

    #[test]
    fn channel_mismatch_is_a_dimension_error() {
        let x = Tensor4::<f64>::zeros(1, 3, 2, 2);
        let p = ConvParams::<f64>::zeros(4, 2);
        assert!(matches!(conv2d(&x, &p), Err(crate::error::Error::Dimension(_))));
    }

    #[test]
    fn matches_reference_on_random_tensors() {
        let mut rng = SplitMix64::new(0xC0);
        for trial in 0..100 {
            let (n, c, oc) = (1 + rng.below(2), 1 + rng.below(3), 1 + rng.below(3));
            let (h, w) = (1 + rng.below(5), 1 + rng.below(5));
            let x = random_tensor(&mut rng, n, c, h, w);
            let mut p = ConvParams::init(oc, c, &mut rng);
            for b in p.bias.iter_mut() {
                *b = rng.uniform(-0.5, 0.5);
            }
            let fast = conv2d(&x, &p).unwrap();
            let slow = reference_conv2d(&x, &p);
            for (a, b) in fast.data().iter().zip(slow.data()) {
                assert!((a - b).abs() <= 1e-12, "trial {trial}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn linearity_with_zero_bias() {
        let mut rng = SplitMix64::new(7);
        let x1 = random_tensor(&mut rng, 1, 2, 4, 4);
        let x2 = random_tensor(&mut rng, 1, 2, 4, 4);
        let p = ConvParams::init(3, 2, &mut rng);
        let (a, b) = (0.6, -1.7);
        let mixed: Vec<f64> =
            x1.data().iter().zip(x2.data()).map(|(&u, &v)| a * u + b * v).collect();
        let lhs = conv2d(&Tensor4::from_vec(1, 2, 4, 4, mixed).unwrap(), &p).unwrap();
        let y1 = conv2d(&x1, &p).unwrap();
        let y2 = conv2d(&x2, &p).unwrap();
        for i in 0..lhs.len() {
            let rhs = a * y1.data()[i] + b * y2.data()[i];
            assert!((lhs.data()[i] - rhs).abs() < 1e-6);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let eps = 1e-5;
        for seed in 0..20u64 {
            let mut rng = SplitMix64::new(1000 + seed);
            let (n, c, oc, h, w) = (1, 2, 2, 3, 4);
            let x = random_tensor(&mut rng, n, c, h, w);
            let mut p = ConvParams::init(oc, c, &mut rng);
            for b in p.bias.iter_mut() {
                *b = rng.uniform(-0.5, 0.5);
            }
            // Fixed downstream gradient; loss = sum(dy .* y).
            let dy = random_tensor(&mut rng, n, oc, h, w);
            let loss = |xt: &Tensor4<f64>, pt: &ConvParams<f64>| {
                let y = conv2d(xt, pt).unwrap();
                y.data().iter().zip(dy.data()).map(|(a, b)| a * b).sum::<f64>()
            };

            let grads = conv2d_backward(&x, &p, &dy).unwrap();

            let fd_x = finite_difference_oracle(
                |v| loss(&Tensor4::from_vec(n, c, h, w, v.to_vec()).unwrap(), &p),
                x.data(),
                eps,
            )
            .unwrap();
            assert!(max_relative_error(grads.dx.data(), &fd_x, 1e-6) <= 1e-4, "dx seed {seed}");

            let fd_k = finite_difference_oracle(
                |v| {
                    let mut pk = p.clone();
                    pk.kernels = v.to_vec();
                    loss(&x, &pk)
                },
                &p.kernels,
                eps,
            )
            .unwrap();
            assert!(max_relative_error(&grads.dkernels, &fd_k, 1e-6) <= 1e-4, "dk seed {seed}");

            let fd_b = finite_difference_oracle(
                |v| {
                    let mut pb = p.clone();
                    pb.bias = v.to_vec();
                    loss(&x, &pb)
                },
                &p.bias,
                eps,
            )
            .unwrap();
            assert!(max_relative_error(&grads.dbias, &fd_b, 1e-6) <= 1e-4, "db seed {seed}");
        }
    }
}
