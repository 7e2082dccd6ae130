//! The screenshot classifier: 12 conv+BN+ReLU blocks with 6 interleaved 2×2
//! max-pools, then 4 fully connected layers ending in a 2-way softmax
//! (class 0 = clean, class 1 = bug).

mod checkpoint;
mod config;
mod metrics;
mod preprocess;
mod train;

pub use checkpoint::{checkpoint_id, load_checkpoint, save_checkpoint};
pub use config::ModelConfig;
pub use metrics::{evaluate, Metrics};
pub use preprocess::preprocess_image;
pub use train::{train, EpochStats, TrainHistory, TrainHyper};

use crate::error::{Error, Result};
use crate::nn::{
    batchnorm, batchnorm_backward, conv2d, conv2d_backward, fully_connected,
    fully_connected_backward, maxpool2x2, maxpool2x2_backward, relu, softmax_cross_entropy,
    BNCache, BNMode, BNParams, ConvParams, FCParams, PoolContext,
};
use crate::rng::{mix_seed, SplitMix64};
use crate::tensor::{Scalar, Tensor4};
use image::RgbImage;

/// Output class index for buggy screenshots.
pub const BUG_CLASS: usize = 1;
/// Output class index for clean screenshots.
pub const CLEAN_CLASS: usize = 0;

/// One conv → batchnorm → relu unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvBlock<T> {
    pub conv: ConvParams<T>,
    pub bn: BNParams<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub config: ModelConfig,
    pub blocks: Vec<ConvBlock<T>>,
    pub fcs: Vec<FCParams<T>>,
    /// Seed the parameters were initialized from.
    pub seed: u64,
}

/// Builds a model with fan-in-scaled uniform weights (±sqrt(6/fan_in)).
///
/// Each layer draws from its own SplitMix64 stream: conv block `i` from
/// `mix_seed(seed, i)`, fully connected layer `j` from `mix_seed(seed, 100 + j)`.
/// Identical `(config, seed)` therefore reproduce bit-identical parameters.
pub fn build_model<T: Scalar>(config: &ModelConfig, seed: u64) -> Result<Model<T>> {
    config.validate()?;
    let mut blocks = Vec::with_capacity(config.conv_channels.len());
    let mut in_ch = config.input_channels;
    for (i, &out_ch) in config.conv_channels.iter().enumerate() {
        let mut rng = SplitMix64::new(mix_seed(seed, i as u64));
        blocks.push(ConvBlock {
            conv: ConvParams::init(out_ch, in_ch, &mut rng),
            bn: BNParams::identity(out_ch),
        });
        in_ch = out_ch;
    }
    let mut fcs = Vec::with_capacity(config.fc_widths.len());
    let mut in_dim = config.flatten_len();
    for (j, &out_dim) in config.fc_widths.iter().enumerate() {
        let mut rng = SplitMix64::new(mix_seed(seed, 100 + j as u64));
        fcs.push(FCParams::init(out_dim, in_dim, &mut rng));
        in_dim = out_dim;
    }
    Ok(Model { config: config.clone(), blocks, fcs, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Intermediates kept by [`forward`]. Train mode retains everything the
/// backward pass needs; both modes always retain the final conv-block
/// activation (the Grad-CAM input) and the FC-stack inputs.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    mode: Mode,
    conv_inputs: Vec<Tensor4<T>>,
    bn_caches: Vec<BNCache<T>>,
    pool_ctxs: Vec<Option<PoolContext>>,
    /// Updated running statistics per block (train mode).
    bn_updates: Vec<(Vec<T>, Vec<T>)>,
    /// Activation after the last conv block and its pool: `(n, c_last, h/64, w/64)`.
    pub final_conv: Tensor4<T>,
    /// Input to each FC layer, sample-major (`n * in_dim` values each).
    fc_inputs: Vec<Vec<T>>,
}

/// Runs the network on a batch, returning logits in a flat `n × 2` row-major
/// vector together with the activation cache.
pub fn forward<T: Scalar>(
    model: &Model<T>,
    batch: &Tensor4<T>,
    mode: Mode,
) -> Result<(Vec<T>, ForwardCache<T>)> {
    let cfg = &model.config;
    let (n, c, h, w) = batch.dims();
    if c != cfg.input_channels || h != cfg.input_height || w != cfg.input_width {
        return Err(Error::Dimension(format!(
            "forward: batch dims {:?} do not match configured input {}x{}x{}",
            batch.dims(),
            cfg.input_channels,
            cfg.input_height,
            cfg.input_width
        )));
    }
    let train = mode == Mode::Train;
    let bn_mode = if train { BNMode::Train } else { BNMode::Infer };

    let mut cache = ForwardCache {
        mode,
        conv_inputs: Vec::new(),
        bn_caches: Vec::new(),
        pool_ctxs: Vec::new(),
        bn_updates: Vec::new(),
        final_conv: Tensor4::zeros(0, 0, 0, 0),
        fc_inputs: Vec::new(),
    };

    let mut x = batch.clone();
    for (i, block) in model.blocks.iter().enumerate() {
        let a = conv2d(&x, &block.conv)?;
        if train {
            cache.conv_inputs.push(x);
        }
        let bn_out = batchnorm(&a, &block.bn, bn_mode)?;
        let r = relu(&bn_out.y);
        if train {
            cache.bn_caches.push(bn_out.cache.expect("train-mode batchnorm returns a cache"));
            cache.bn_updates.push((bn_out.running_mean, bn_out.running_var));
        }
        if cfg.pool_after.contains(&i) {
            let (pooled, ctx) = maxpool2x2(&r)?;
            if train {
                cache.pool_ctxs.push(Some(ctx));
            }
            x = pooled;
        } else {
            if train {
                cache.pool_ctxs.push(None);
            }
            x = r;
        }
    }
    cache.final_conv = x;

    let flat_len = cfg.flatten_len();
    let mut cur: Vec<T> = cache.final_conv.data().to_vec();
    let last = model.fcs.len() - 1;
    for (j, fc) in model.fcs.iter().enumerate() {
        cache.fc_inputs.push(cur.clone());
        debug_assert_eq!(cur.len(), n * fc.in_dim);
        let mut next = Vec::with_capacity(n * fc.out_dim);
        for s in 0..n {
            let xi = &cur[s * fc.in_dim..(s + 1) * fc.in_dim];
            next.extend(fully_connected(xi, fc)?);
        }
        if j < last {
            for v in next.iter_mut() {
                if *v < T::zero() {
                    *v = T::zero();
                }
            }
        }
        cur = next;
    }
    debug_assert_eq!(cur.len(), n * 2);
    debug_assert_eq!(flat_len, model.fcs[0].in_dim);
    Ok((cur, cache))
}

/// Gradients for every trainable parameter, in the same order as
/// [`Model::trainable_params`].
#[derive(Debug, Clone)]
pub struct ModelGrads<T> {
    pub block_kernels: Vec<Vec<T>>,
    pub block_bias: Vec<Vec<T>>,
    pub block_gamma: Vec<Vec<T>>,
    pub block_beta: Vec<Vec<T>>,
    pub fc_weights: Vec<Vec<T>>,
    pub fc_bias: Vec<Vec<T>>,
}

impl<T: Scalar> ModelGrads<T> {
    /// Flattened view matching [`Model::trainable_params`] order.
    pub fn arrays(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for i in 0..self.block_kernels.len() {
            out.push(self.block_kernels[i].as_slice());
            out.push(self.block_bias[i].as_slice());
            out.push(self.block_gamma[i].as_slice());
            out.push(self.block_beta[i].as_slice());
        }
        for j in 0..self.fc_weights.len() {
            out.push(self.fc_weights[j].as_slice());
            out.push(self.fc_bias[j].as_slice());
        }
        out
    }
}

/// Backward through the FC stack only, producing the gradient at the final
/// conv activation. This is the Grad-CAM path; it works with caches from
/// either mode and skips parameter-gradient allocation.
pub fn head_backward<T: Scalar>(
    model: &Model<T>,
    cache: &ForwardCache<T>,
    dlogits: &[T],
) -> Result<Tensor4<T>> {
    let (d_flat, _) = fc_stack_backward(model, cache, dlogits, false)?;
    let (n, c, h, w) = cache.final_conv.dims();
    Tensor4::from_vec(n, c, h, w, d_flat)
}

/// Accumulated per-layer `(dweights, dbias)` pairs.
type FcParamGrads<T> = (Vec<Vec<T>>, Vec<Vec<T>>);

fn fc_stack_backward<T: Scalar>(
    model: &Model<T>,
    cache: &ForwardCache<T>,
    dlogits: &[T],
    want_param_grads: bool,
) -> Result<(Vec<T>, Option<FcParamGrads<T>>)> {
    let n = cache.final_conv.n();
    if dlogits.len() != n * 2 {
        return Err(Error::Dimension(format!(
            "fc backward: dlogits length {} does not match batch {n} x 2",
            dlogits.len()
        )));
    }
    let mut dw_acc: Vec<Vec<T>> = Vec::new();
    let mut db_acc: Vec<Vec<T>> = Vec::new();
    if want_param_grads {
        for fc in &model.fcs {
            dw_acc.push(vec![T::zero(); fc.weights.len()]);
            db_acc.push(vec![T::zero(); fc.bias.len()]);
        }
    }

    let mut d_cur = dlogits.to_vec();
    for j in (0..model.fcs.len()).rev() {
        let fc = &model.fcs[j];
        let x_all = &cache.fc_inputs[j];
        let mut d_prev = vec![T::zero(); n * fc.in_dim];
        for s in 0..n {
            let xi = &x_all[s * fc.in_dim..(s + 1) * fc.in_dim];
            let dyi = &d_cur[s * fc.out_dim..(s + 1) * fc.out_dim];
            let grads = fully_connected_backward(xi, fc, dyi)?;
            d_prev[s * fc.in_dim..(s + 1) * fc.in_dim].copy_from_slice(&grads.dx);
            if want_param_grads {
                for (acc, g) in dw_acc[j].iter_mut().zip(&grads.dweights) {
                    *acc += *g;
                }
                for (acc, g) in db_acc[j].iter_mut().zip(&grads.dbias) {
                    *acc += *g;
                }
            }
        }
        if j > 0 {
            // The input to layer j is the post-ReLU output of layer j-1;
            // positive entries mark where the ReLU passed gradient through.
            for (d, &v) in d_prev.iter_mut().zip(x_all.iter()) {
                if v <= T::zero() {
                    *d = T::zero();
                }
            }
        }
        d_cur = d_prev;
    }
    let param = if want_param_grads { Some((dw_acc, db_acc)) } else { None };
    Ok((d_cur, param))
}

/// Full backward pass from `dlogits` (flat `n × 2`) down to every parameter.
/// Requires a train-mode cache.
pub fn backward<T: Scalar>(
    model: &Model<T>,
    cache: &ForwardCache<T>,
    dlogits: &[T],
) -> Result<ModelGrads<T>> {
    if cache.mode != Mode::Train {
        return Err(Error::Argument(
            "backward requires a cache produced by a train-mode forward pass".into(),
        ));
    }
    let (d_flat, fc_param) = fc_stack_backward(model, cache, dlogits, true)?;
    let (fc_weights, fc_bias) = fc_param.expect("param grads requested");

    let (n, c, h, w) = cache.final_conv.dims();
    let mut d = Tensor4::from_vec(n, c, h, w, d_flat)?;

    let nb = model.blocks.len();
    let mut block_kernels = vec![Vec::new(); nb];
    let mut block_bias = vec![Vec::new(); nb];
    let mut block_gamma = vec![Vec::new(); nb];
    let mut block_beta = vec![Vec::new(); nb];

    for i in (0..nb).rev() {
        let block = &model.blocks[i];
        if let Some(ctx) = &cache.pool_ctxs[i] {
            d = maxpool2x2_backward(ctx, &d)?;
        }
        // ReLU mask, recomputed from the cached normalized input.
        let bn_cache = &cache.bn_caches[i];
        for ni in 0..d.n() {
            for ci in 0..d.c() {
                let (g, b) = (block.bn.gamma[ci], block.bn.beta[ci]);
                for yy in 0..d.h() {
                    for xx in 0..d.w() {
                        let idx = d.index(ni, ci, yy, xx);
                        let pre = g * bn_cache.xhat.data()[idx] + b;
                        if pre <= T::zero() {
                            d.data_mut()[idx] = T::zero();
                        }
                    }
                }
            }
        }
        let bn_grads = batchnorm_backward(bn_cache, &block.bn, &d)?;
        let conv_grads = conv2d_backward(&cache.conv_inputs[i], &block.conv, &bn_grads.dx)?;
        block_kernels[i] = conv_grads.dkernels;
        block_bias[i] = conv_grads.dbias;
        block_gamma[i] = bn_grads.dgamma;
        block_beta[i] = bn_grads.dbeta;
        d = conv_grads.dx;
    }

    Ok(ModelGrads { block_kernels, block_bias, block_gamma, block_beta, fc_weights, fc_bias })
}

impl<T: Scalar> ForwardCache<T> {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Updated batchnorm running statistics, one `(mean, var)` pair per block.
    /// Empty for infer-mode caches.
    pub fn bn_updates(&self) -> &[(Vec<T>, Vec<T>)] {
        &self.bn_updates
    }
}

impl<T: Scalar> Model<T> {
    /// Trainable parameter arrays in update order: per block kernels, conv
    /// bias, gamma, beta; then per FC layer weights, bias. Running statistics
    /// are not trainable and are excluded.
    pub fn trainable_params(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for b in &self.blocks {
            out.push(b.conv.kernels.as_slice());
            out.push(b.conv.bias.as_slice());
            out.push(b.bn.gamma.as_slice());
            out.push(b.bn.beta.as_slice());
        }
        for f in &self.fcs {
            out.push(f.weights.as_slice());
            out.push(f.bias.as_slice());
        }
        out
    }

    /// Mutable counterpart of [`Model::trainable_params`], same order.
    pub fn trainable_params_mut(&mut self) -> Vec<&mut Vec<T>> {
        let mut out = Vec::new();
        for b in &mut self.blocks {
            out.push(&mut b.conv.kernels);
            out.push(&mut b.conv.bias);
            out.push(&mut b.bn.gamma);
            out.push(&mut b.bn.beta);
        }
        for f in &mut self.fcs {
            out.push(&mut f.weights);
            out.push(&mut f.bias);
        }
        out
    }

    pub fn trainable_param_count(&self) -> usize {
        self.trainable_params().iter().map(|a| a.len()).sum()
    }

    pub fn convert<U: Scalar>(&self) -> Model<U> {
        Model {
            config: self.config.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| ConvBlock { conv: b.conv.convert(), bn: b.bn.convert() })
                .collect(),
            fcs: self.fcs.iter().map(|f| f.convert()).collect(),
            seed: self.seed,
        }
    }

    /// Adopts updated running statistics from a train-mode forward pass.
    pub fn apply_bn_updates(&mut self, cache: &ForwardCache<T>) {
        for (block, (mean, var)) in self.blocks.iter_mut().zip(cache.bn_updates()) {
            block.bn.running_mean = mean.clone();
            block.bn.running_var = var.clone();
        }
    }
}

/// Classification outcome for one screenshot. Probability ties at exactly 0.5
/// count as bug.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Verdict {
    pub is_bug: bool,
    pub bug_probability: f64,
}

impl Verdict {
    pub fn from_probability(bug_probability: f64) -> Self {
        Verdict { is_bug: bug_probability >= 0.5, bug_probability }
    }
}

/// Preprocesses one image and classifies it.
pub fn predict<T: Scalar>(model: &Model<T>, img: &RgbImage) -> Result<Verdict> {
    let x = preprocess_image::<T>(img, &model.config)?;
    let (logits, _) = forward(model, &x, Mode::Infer)?;
    let sm = softmax_cross_entropy(&logits, BUG_CLASS)?;
    Ok(Verdict::from_probability(sm.probs[BUG_CLASS].to_f64()))
}
