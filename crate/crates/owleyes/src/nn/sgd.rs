//! SGD with classical momentum: `v ← momentum·v + g`, `p ← p − lr·v`.

use crate::error::{Error, Result};
use crate::tensor::Scalar;

pub fn sgd_step<T: Scalar>(
    params: &mut [T],
    velocity: &mut [T],
    grads: &[T],
    lr: T,
    momentum: T,
) -> Result<()> {
    if params.len() != velocity.len() || params.len() != grads.len() {
        return Err(Error::Dimension(format!(
            "sgd_step: params/velocity/grads lengths differ ({}/{}/{})",
            params.len(),
            velocity.len(),
            grads.len()
        )));
    }
    if !(lr >= T::zero() && lr.is_finite()) {
        return Err(Error::Argument(format!("learning rate must be finite and >= 0, got {lr}")));
    }
    if !(momentum >= T::zero() && momentum < T::one()) {
        return Err(Error::Argument(format!("momentum must be in [0, 1), got {momentum}")));
    }
    for i in 0..params.len() {
        velocity[i] = momentum * velocity[i] + grads[i];
        params[i] -= lr * velocity[i];
    }
    Ok(())
}
