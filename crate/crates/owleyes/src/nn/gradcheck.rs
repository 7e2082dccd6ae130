//! Finite-difference gradient oracle.
//!
//! Every analytic gradient in this crate is checked against central
//! differences computed by [`finite_difference_oracle`]. The oracle only ever
//! evaluates the supplied scalar function, so it stays independent of the
//! backward implementations it verifies.

use crate::error::{Error, Result};
use crate::tensor::Scalar;

/// Central-difference gradient of a scalar function: per coordinate `i`,
/// `(f(x + eps*e_i) - f(x - eps*e_i)) / (2*eps)`.
pub fn finite_difference_oracle<T, F>(mut f: F, x: &[T], eps: T) -> Result<Vec<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    if eps <= T::zero() || eps.is_nan() {
        return Err(Error::Argument(format!("eps must be positive, got {eps}")));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    let two = T::from_f64(2.0);
    for i in 0..x.len() {
        probe[i] = x[i] + eps;
        let hi = f(&probe);
        probe[i] = x[i] - eps;
        let lo = f(&probe);
        probe[i] = x[i];
        if !hi.is_finite() || !lo.is_finite() {
            return Err(Error::Numeric(format!(
                "function evaluated non-finite near coordinate {i}"
            )));
        }
        grad.push((hi - lo) / (two * eps));
    }
    Ok(grad)
}

/// Relative error with the denominator floored to keep near-zero pairs
/// comparable: `|a - b| / max(floor, |a|, |b|)`.
pub fn relative_error<T: Scalar>(a: T, b: T, floor: T) -> T {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Largest per-element [`relative_error`] between two gradient vectors.
pub fn max_relative_error<T: Scalar>(analytic: &[T], numeric: &[T], floor: T) -> T {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &b)| relative_error(a, b, floor))
        .fold(T::zero(), |m, e| m.max(e))
}
