//! Per-channel batch normalization over `(n, h, w)`.
//!
//! Train mode normalizes with batch statistics (population variance) and
//! returns updated running statistics; infer mode normalizes with the stored
//! running statistics. Nothing is mutated in place — callers decide when to
//! adopt the returned running stats.

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor4};

/// Learnable scale/shift plus tracked running statistics for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BNParams<T> {
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    /// Added to the variance before the square root. Must be positive.
    pub epsilon: T,
    /// Running-stat blend: `new = (1 - momentum) * old + momentum * batch`.
    pub momentum: T,
}

impl<T: Scalar> BNParams<T> {
    /// gamma 1, beta 0, running mean 0, running var 1, eps 1e-5, momentum 0.1.
    pub fn identity(channels: usize) -> Self {
        BNParams {
            gamma: vec![T::one(); channels],
            beta: vec![T::zero(); channels],
            running_mean: vec![T::zero(); channels],
            running_var: vec![T::one(); channels],
            epsilon: T::from_f64(1e-5),
            momentum: T::from_f64(0.1),
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    pub fn convert<U: Scalar>(&self) -> BNParams<U> {
        BNParams {
            gamma: self.gamma.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
            beta: self.beta.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
            running_mean: self.running_mean.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
            running_var: self.running_var.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
            epsilon: U::from_f64(self.epsilon.to_f64()),
            momentum: U::from_f64(self.momentum.to_f64()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BNMode {
    Train,
    Infer,
}

/// Intermediates retained for [`batchnorm_backward`].
#[derive(Debug, Clone)]
pub struct BNCache<T> {
    /// Normalized input (before gamma/beta).
    pub xhat: Tensor4<T>,
    /// Per-channel `1 / sqrt(var + eps)` used in the forward pass.
    pub inv_std: Vec<T>,
}

/// Result of a batchnorm forward pass. `running_mean`/`running_var` carry
/// the updated statistics in train mode and echo the inputs in infer mode.
#[derive(Debug, Clone)]
pub struct BNOutput<T> {
    pub y: Tensor4<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    /// Present only in train mode.
    pub cache: Option<BNCache<T>>,
}

fn check_channels<T: Scalar>(x: &Tensor4<T>, p: &BNParams<T>) -> Result<()> {
    if x.c() != p.channels() {
        return Err(Error::Dimension(format!(
            "batchnorm: input has {} channels, params expect {}",
            x.c(),
            p.channels()
        )));
    }
    Ok(())
}

pub fn batchnorm<T: Scalar>(x: &Tensor4<T>, p: &BNParams<T>, mode: BNMode) -> Result<BNOutput<T>> {
    check_channels(x, p)?;
    let (n, c, h, w) = x.dims();
    let m = n * h * w;
    match mode {
        BNMode::Train => {
            if m < 2 {
                return Err(Error::Dimension(format!(
                    "batchnorm train mode needs at least 2 values per channel, got {m}"
                )));
            }
            let inv_m = T::from_f64(1.0 / m as f64);
            let mut mean = vec![T::zero(); c];
            let mut var = vec![T::zero(); c];
            for ci in 0..c {
                let mut sum = T::zero();
                for ni in 0..n {
                    sum += x.channel(ni, ci).iter().copied().sum::<T>();
                }
                let mu = sum * inv_m;
                let mut sq = T::zero();
                for ni in 0..n {
                    for &v in x.channel(ni, ci) {
                        let d = v - mu;
                        sq += d * d;
                    }
                }
                mean[ci] = mu;
                var[ci] = sq * inv_m;
            }

            let inv_std: Vec<T> =
                var.iter().map(|&v| T::one() / (v + p.epsilon).sqrt()).collect();
            let mut xhat = Tensor4::zeros(n, c, h, w);
            let mut y = Tensor4::zeros(n, c, h, w);
            for ni in 0..n {
                for ci in 0..c {
                    let (mu, is, g, b) = (mean[ci], inv_std[ci], p.gamma[ci], p.beta[ci]);
                    for yy in 0..h {
                        for xx in 0..w {
                            let i = x.index(ni, ci, yy, xx);
                            let xh = (x.data()[i] - mu) * is;
                            xhat.data_mut()[i] = xh;
                            y.data_mut()[i] = g * xh + b;
                        }
                    }
                }
            }

            let one_minus = T::one() - p.momentum;
            let running_mean: Vec<T> = p
                .running_mean
                .iter()
                .zip(&mean)
                .map(|(&r, &b)| one_minus * r + p.momentum * b)
                .collect();
            let running_var: Vec<T> = p
                .running_var
                .iter()
                .zip(&var)
                .map(|(&r, &b)| one_minus * r + p.momentum * b)
                .collect();

            Ok(BNOutput {
                y,
                running_mean,
                running_var,
                cache: Some(BNCache { xhat, inv_std }),
            })
        }
        BNMode::Infer => {
            let mut y = Tensor4::zeros(n, c, h, w);
            for ci in 0..c {
                let is = T::one() / (p.running_var[ci] + p.epsilon).sqrt();
                let (mu, g, b) = (p.running_mean[ci], p.gamma[ci], p.beta[ci]);
                for ni in 0..n {
                    for yy in 0..h {
                        for xx in 0..w {
                            let i = x.index(ni, ci, yy, xx);
                            y.data_mut()[i] = g * (x.data()[i] - mu) * is + b;
                        }
                    }
                }
            }
            Ok(BNOutput {
                y,
                running_mean: p.running_mean.clone(),
                running_var: p.running_var.clone(),
                cache: None,
            })
        }
    }
}

/// Gradients returned by [`batchnorm_backward`].
#[derive(Debug, Clone)]
pub struct BNGrads<T> {
    pub dx: Tensor4<T>,
    pub dgamma: Vec<T>,
    pub dbeta: Vec<T>,
}

/// Train-mode backward through the batch statistics:
/// `dx = gamma * inv_std * (dy - mean(dy) - xhat * mean(dy * xhat))`.
pub fn batchnorm_backward<T: Scalar>(
    cache: &BNCache<T>,
    p: &BNParams<T>,
    dy: &Tensor4<T>,
) -> Result<BNGrads<T>> {
    check_channels(dy, p)?;
    if dy.dims() != cache.xhat.dims() {
        return Err(Error::Dimension(format!(
            "batchnorm_backward: dy dims {:?} do not match cached dims {:?}",
            dy.dims(),
            cache.xhat.dims()
        )));
    }
    let (n, c, h, w) = dy.dims();
    let m = n * h * w;
    let inv_m = T::from_f64(1.0 / m as f64);

    let mut dgamma = vec![T::zero(); c];
    let mut dbeta = vec![T::zero(); c];
    let mut dx = Tensor4::zeros(n, c, h, w);
    for ci in 0..c {
        let mut sum_dy = T::zero();
        let mut sum_dy_xhat = T::zero();
        for ni in 0..n {
            let g = dy.channel(ni, ci);
            let xh = cache.xhat.channel(ni, ci);
            for (gv, xv) in g.iter().zip(xh) {
                sum_dy += *gv;
                sum_dy_xhat += *gv * *xv;
            }
        }
        dbeta[ci] = sum_dy;
        dgamma[ci] = sum_dy_xhat;

        let mean_dy = sum_dy * inv_m;
        let mean_dy_xhat = sum_dy_xhat * inv_m;
        let scale = p.gamma[ci] * cache.inv_std[ci];
        for ni in 0..n {
            for yy in 0..h {
                for xx in 0..w {
                    let i = dy.index(ni, ci, yy, xx);
                    let xh = cache.xhat.data()[i];
                    dx.data_mut()[i] = scale * (dy.data()[i] - mean_dy - xh * mean_dy_xhat);
                }
            }
        }
    }
    Ok(BNGrads { dx, dgamma, dbeta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{finite_difference_oracle, max_relative_error};
    use crate::rng::SplitMix64;

    fn random_tensor(rng: &mut SplitMix64, n: usize, c: usize, h: usize, w: usize) -> Tensor4<f64> {
        let data = (0..n * c * h * w).map(|_| rng.uniform(-2.0, 2.0)).collect();
        Tensor4::from_vec(n, c, h, w, data).unwrap()
    }

    #[test]
    fn constant_channel_normalizes_to_beta() {
        let x = Tensor4::<f64>::filled(2, 1, 2, 2, 7.3);
        let mut p = BNParams::identity(1);
        p.beta[0] = 0.3;
        let out = batchnorm(&x, &p, BNMode::Train).unwrap();
        for &v in out.y.data() {
            assert!((v - 0.3).abs() <= 1e-3, "{v}");
        }
    }

    #[test]
    fn two_values_normalize_to_plus_minus_one() {
        // Values {1, 3}: mean 2, population variance 1.
        let x = Tensor4::from_vec(2, 1, 1, 1, vec![1.0f64, 3.0]).unwrap();
        let mut p = BNParams::identity(1);
        p.epsilon = 1e-12;
        let out = batchnorm(&x, &p, BNMode::Train).unwrap();
        assert!((out.y.data()[0] + 1.0).abs() < 1e-6);
        assert!((out.y.data()[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infer_with_identity_stats_is_identity() {
        let mut rng = SplitMix64::new(5);
        let x = random_tensor(&mut rng, 1, 3, 4, 4);
        let p = BNParams::identity(3);
        let out = batchnorm(&x, &p, BNMode::Infer).unwrap();
        for (a, b) in out.y.data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn train_output_is_standardized() {
        let mut rng = SplitMix64::new(11);
        let x = random_tensor(&mut rng, 4, 2, 3, 3);
        let p = BNParams::identity(2);
        let out = batchnorm(&x, &p, BNMode::Train).unwrap();
        let (n, _, h, w) = x.dims();
        let m = (n * h * w) as f64;
        for ci in 0..2 {
            let mut sum = 0.0;
            let mut sq = 0.0;
            for ni in 0..n {
                for &v in out.y.channel(ni, ci) {
                    sum += v;
                    sq += v * v;
                }
            }
            let mean = sum / m;
            let var = sq / m - mean * mean;
            assert!(mean.abs() <= 1e-6, "mean {mean}");
            assert!((var - 1.0).abs() <= 1e-3, "var {var}");
        }
    }

    #[test]
    fn running_stats_blend_with_momentum() {
        let x = Tensor4::from_vec(2, 1, 1, 1, vec![1.0f64, 3.0]).unwrap();
        let p = BNParams::identity(1); // running mean 0, var 1, momentum 0.1
        let out = batchnorm(&x, &p, BNMode::Train).unwrap();
        assert!((out.running_mean[0] - 0.2).abs() < 1e-12); // 0.9*0 + 0.1*2
        assert!((out.running_var[0] - 1.0).abs() < 1e-12); // 0.9*1 + 0.1*1
    }

    #[test]
    fn channel_mismatch_is_a_dimension_error() {
        let x = Tensor4::<f64>::zeros(1, 3, 2, 2);
        let p = BNParams::identity(2);
        assert!(matches!(
            batchnorm(&x, &p, BNMode::Train),
            Err(crate::error::Error::Dimension(_))
        ));
    }

    #[test]
    fn train_needs_two_values_per_channel() {
        let x = Tensor4::<f64>::zeros(1, 2, 1, 1);
        let p = BNParams::identity(2);
        assert!(batchnorm(&x, &p, BNMode::Train).is_err());
        assert!(batchnorm(&x, &p, BNMode::Infer).is_ok());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let eps = 1e-5;
        for seed in 0..20u64 {
            let mut rng = SplitMix64::new(2000 + seed);
            let (n, c, h, w) = (2, 2, 3, 3);
            let x = random_tensor(&mut rng, n, c, h, w);
            let mut p = BNParams::identity(c);
            for g in p.gamma.iter_mut() {
                *g = rng.uniform(0.5, 1.5);
            }
            for b in p.beta.iter_mut() {
                *b = rng.uniform(-0.5, 0.5);
            }
            let dy = random_tensor(&mut rng, n, c, h, w);
            let loss = |xt: &Tensor4<f64>, pt: &BNParams<f64>| {
                let out = batchnorm(xt, pt, BNMode::Train).unwrap();
                out.y.data().iter().zip(dy.data()).map(|(a, b)| a * b).sum::<f64>()
            };

            let out = batchnorm(&x, &p, BNMode::Train).unwrap();
            let grads = batchnorm_backward(out.cache.as_ref().unwrap(), &p, &dy).unwrap();

            let fd_x = finite_difference_oracle(
                |v| loss(&Tensor4::from_vec(n, c, h, w, v.to_vec()).unwrap(), &p),
                x.data(),
                eps,
            )
            .unwrap();
            assert!(max_relative_error(grads.dx.data(), &fd_x, 1e-6) <= 1e-4, "dx seed {seed}");

            let fd_gamma = finite_difference_oracle(
                |v| {
                    let mut pg = p.clone();
                    pg.gamma = v.to_vec();
                    loss(&x, &pg)
                },
                &p.gamma,
                eps,
            )
            .unwrap();
            assert!(max_relative_error(&grads.dgamma, &fd_gamma, 1e-6) <= 1e-4, "dgamma {seed}");

            let fd_beta = finite_difference_oracle(
                |v| {
                    let mut pb = p.clone();
                    pb.beta = v.to_vec();
                    loss(&x, &pb)
                },
                &p.beta,
                eps,
            )
            .unwrap();
            assert!(max_relative_error(&grads.dbeta, &fd_beta, 1e-6) <= 1e-4, "dbeta {seed}");
        }
    }
}
