//! Rectified linear activation. The subgradient at exactly 0 is 0.

use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor4};

pub fn relu<T: Scalar>(x: &Tensor4<T>) -> Tensor4<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// `dx = dy` where the forward input was strictly positive, else 0.
///
/// Passing the forward *output* as `x` yields the same mask, since
/// `relu(v) > 0` exactly when `v > 0`.
pub fn relu_backward<T: Scalar>(x: &Tensor4<T>, dy: &Tensor4<T>) -> Result<Tensor4<T>> {
    if x.dims() != dy.dims() {
        return Err(Error::Dimension(format!(
            "relu_backward: x dims {:?} vs dy dims {:?}",
            x.dims(),
            dy.dims()
        )));
    }
    let mut dx = dy.clone();
    for (d, &xv) in dx.data_mut().iter_mut().zip(x.data()) {
        if xv <= T::zero() {
            *d = T::zero();
        }
    }
    Ok(dx)
}
