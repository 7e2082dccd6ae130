//! Softmax + cross-entropy with the gradient folded in.
//!
//! The max logit is subtracted before exponentiation so large logits cannot
//! overflow.

use crate::error::{Error, Result};
use crate::tensor::Scalar;

#[derive(Debug, Clone)]
pub struct SoftmaxLoss<T> {
    pub probs: Vec<T>,
    pub loss: T,
    /// `probs - onehot(label)`.
    pub dlogits: Vec<T>,
}

pub fn softmax_cross_entropy<T: Scalar>(logits: &[T], label: usize) -> Result<SoftmaxLoss<T>> {
    if logits.len() < 2 {
        return Err(Error::Argument(format!(
            "softmax needs at least 2 logits, got {}",
            logits.len()
        )));
    }
    if label >= logits.len() {
        return Err(Error::Argument(format!(
            "label {label} out of range for {} logits",
            logits.len()
        )));
    }
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    let probs: Vec<T> = exps.iter().map(|&e| e / sum).collect();
    let loss = -probs[label].ln();
    let mut dlogits = probs.clone();
    dlogits[label] -= T::one();
    Ok(SoftmaxLoss { probs, loss, dlogits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{finite_difference_oracle, max_relative_error};
    use crate::rng::SplitMix64;

    #[test]
    fn equal_logits_split_evenly() {
        let out = softmax_cross_entropy(&[1.5f64, 1.5], 0).unwrap();
        assert!((out.probs[0] - 0.5).abs() < 1e-12);
        assert!((out.probs[1] - 0.5).abs() < 1e-12);
        assert!((out.loss - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn shift_invariance() {
        let a = softmax_cross_entropy(&[0.2f64, -1.0, 3.0], 2).unwrap();
        let b = softmax_cross_entropy(&[100.2f64, 99.0, 103.0], 2).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn huge_logits_do_not_overflow() {
        let out = softmax_cross_entropy(&[1e4f64, -1e4], 0).unwrap();
        assert!(out.probs.iter().all(|p| p.is_finite()));
        assert!((out.probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn label_out_of_range_is_an_argument_error() {
        assert!(matches!(
            softmax_cross_entropy(&[0.0f64, 1.0], 2),
            Err(crate::error::Error::Argument(_))
        ));
    }

    #[test]
    fn probs_sum_to_one_and_keep_argmax() {
        let mut rng = SplitMix64::new(17);
        for _ in 0..100 {
            let k = 2 + rng.below(5);
            let logits: Vec<f64> = (0..k).map(|_| rng.uniform(-4.0, 4.0)).collect();
            let out = softmax_cross_entropy(&logits, 0).unwrap();
            let sum: f64 = out.probs.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-6);
            assert!(out.probs.iter().all(|&p| p > 0.0 && p < 1.0));
            let argmax_l = logits
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            let argmax_p = out
                .probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(argmax_l, argmax_p);
        }
    }

    #[test]
    fn dlogits_matches_finite_differences() {
        let mut rng = SplitMix64::new(5000);
        for seed in 0..20 {
            let logits: Vec<f64> = (0..4).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let label = rng.below(4);
            let out = softmax_cross_entropy(&logits, label).unwrap();
            let fd = finite_difference_oracle(
                |v| softmax_cross_entropy(v, label).unwrap().loss,
                &logits,
                1e-5,
            )
            .unwrap();
            assert!(max_relative_error(&out.dlogits, &fd, 1e-6) <= 1e-4, "seed {seed}");
        }
    }
}
