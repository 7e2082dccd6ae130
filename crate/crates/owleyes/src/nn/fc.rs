//! Fully connected layer on flat vectors: `y = W·x + b`.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::tensor::Scalar;

/// Weights `(out_dim, in_dim)` row-major plus a bias per output.
#[derive(Debug, Clone, PartialEq)]
pub struct FCParams<T> {
    pub out_dim: usize,
    pub in_dim: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> FCParams<T> {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        FCParams { out_dim, in_dim, weights: vec![T::zero(); out_dim * in_dim], bias: vec![T::zero(); out_dim] }
    }

    /// Fan-in-scaled uniform init: weights in ±sqrt(6/in_dim), bias zero.
    pub fn init(out_dim: usize, in_dim: usize, rng: &mut SplitMix64) -> Self {
        let mut p = Self::zeros(out_dim, in_dim);
        let bound = (6.0 / in_dim as f64).sqrt();
        for w in p.weights.iter_mut() {
            *w = T::from_f64(rng.uniform(-bound, bound));
        }
        p
    }

    pub fn identity(dim: usize) -> Self {
        let mut p = Self::zeros(dim, dim);
        for i in 0..dim {
            p.weights[i * dim + i] = T::one();
        }
        p
    }

    pub fn convert<U: Scalar>(&self) -> FCParams<U> {
        FCParams {
            out_dim: self.out_dim,
            in_dim: self.in_dim,
            weights: self.weights.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
            bias: self.bias.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
        }
    }
}

fn check_input<T: Scalar>(x: &[T], p: &FCParams<T>) -> Result<()> {
    if x.len() != p.in_dim {
        return Err(Error::Dimension(format!(
            "fully_connected: input length {} does not match in_dim {}",
            x.len(),
            p.in_dim
        )));
    }
    Ok(())
}

pub fn fully_connected<T: Scalar>(x: &[T], p: &FCParams<T>) -> Result<Vec<T>> {
    check_input(x, p)?;
    let mut y = Vec::with_capacity(p.out_dim);
    for o in 0..p.out_dim {
        let row = &p.weights[o * p.in_dim..(o + 1) * p.in_dim];
        let mut acc = p.bias[o];
        for (wv, xv) in row.iter().zip(x) {
            acc += *wv * *xv;
        }
        y.push(acc);
    }
    Ok(y)
}

/// Gradients returned by [`fully_connected_backward`].
#[derive(Debug, Clone)]
pub struct FCGrads<T> {
    pub dx: Vec<T>,
    pub dweights: Vec<T>,
    pub dbias: Vec<T>,
}

/// `dW = dy ⊗ x`, `db = dy`, `dx = Wᵀ·dy`.
pub fn fully_connected_backward<T: Scalar>(
    x: &[T],
    p: &FCParams<T>,
    dy: &[T],
) -> Result<FCGrads<T>> {
    check_input(x, p)?;
    if dy.len() != p.out_dim {
        return Err(Error::Dimension(format!(
            "fully_connected_backward: dy length {} does not match out_dim {}",
            dy.len(),
            p.out_dim
        )));
    }
    let mut dweights = vec![T::zero(); p.weights.len()];
    let mut dx = vec![T::zero(); p.in_dim];
    for o in 0..p.out_dim {
        let g = dy[o];
        let row = &p.weights[o * p.in_dim..(o + 1) * p.in_dim];
        let drow = &mut dweights[o * p.in_dim..(o + 1) * p.in_dim];
        for i in 0..p.in_dim {
            drow[i] = g * x[i];
            dx[i] += row[i] * g;
        }
    }
    Ok(FCGrads { dx, dweights, dbias: dy.to_vec() })
}
