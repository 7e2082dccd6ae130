//! Mini-batch SGD training loop.

use super::{backward, forward, Mode, Model, BUG_CLASS};
use crate::error::{Error, Result};
use crate::nn::{sgd_step, softmax_cross_entropy};
use crate::raster::load_rgb;
use crate::rng::{mix_seed, SplitMix64};
use crate::synth::{DatasetManifest, Label};
use crate::tensor::{Scalar, Tensor4};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHyper {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper { epochs: 100, batch_size: 16, lr: 0.01, momentum: 0.9, seed: 0 }
    }
}

impl TrainHyper {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Argument("batch_size must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Argument(format!("lr must be positive, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Argument(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean cross-entropy over the epoch's samples.
    pub loss: f64,
    /// Fraction of samples whose argmax matched the label during the epoch.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    pub warnings: Vec<String>,
}

/// Loads and preprocesses every manifest row once.
fn load_samples<T: Scalar>(
    model: &Model<T>,
    manifest: &DatasetManifest,
) -> Result<Vec<(Tensor4<T>, usize)>> {
    let mut samples = Vec::with_capacity(manifest.rows.len());
    for row in &manifest.rows {
        let path = manifest.resolve(row);
        let img = load_rgb(&path)?;
        let tensor = super::preprocess_image::<T>(&img, &model.config)?;
        let label = match row.label {
            Label::Bug => BUG_CLASS,
            Label::Clean => super::CLEAN_CLASS,
        };
        samples.push((tensor, label));
    }
    Ok(samples)
}

fn assemble_batch<T: Scalar>(
    samples: &[(Tensor4<T>, usize)],
    indices: &[usize],
) -> (Tensor4<T>, Vec<usize>) {
    let (_, c, h, w) = samples[indices[0]].0.dims();
    let mut batch = Tensor4::zeros(indices.len(), c, h, w);
    let mut labels = Vec::with_capacity(indices.len());
    let stride = c * h * w;
    for (slot, &idx) in indices.iter().enumerate() {
        let (tensor, label) = &samples[idx];
        batch.data_mut()[slot * stride..(slot + 1) * stride].copy_from_slice(tensor.data());
        labels.push(*label);
    }
    (batch, labels)
}

/// Trains for `hyper.epochs` epochs of seeded shuffled mini-batch SGD and
/// returns the updated model plus per-epoch history. Identical inputs and
/// seed reproduce the identical history; epoch `e` shuffles with
/// `mix_seed(hyper.seed, e)`.
pub fn train<T: Scalar>(
    model: Model<T>,
    manifest: &DatasetManifest,
    hyper: &TrainHyper,
) -> Result<(Model<T>, TrainHistory)> {
    hyper.validate()?;
    if manifest.rows.is_empty() {
        return Err(Error::Validation("training manifest is empty".into()));
    }
    let mut history = TrainHistory::default();
    let bugs = manifest.bug_rows().count();
    if bugs == 0 || bugs == manifest.rows.len() {
        history.warnings.push(format!(
            "manifest holds a single class ({} of {} rows are bugs); training proceeds",
            bugs,
            manifest.rows.len()
        ));
    }
    if hyper.epochs == 0 {
        return Ok((model, history));
    }

    let mut model = model;
    let samples = load_samples(&model, manifest)?;
    let n = samples.len();
    let lr = T::from_f64(hyper.lr);
    let momentum = T::from_f64(hyper.momentum);
    let mut velocity: Vec<Vec<T>> =
        model.trainable_params().iter().map(|p| vec![T::zero(); p.len()]).collect();

    for epoch in 0..hyper.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        SplitMix64::new(mix_seed(hyper.seed, epoch as u64)).shuffle(&mut order);

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(hyper.batch_size) {
            let (batch, labels) = assemble_batch(&samples, chunk);
            let bn = chunk.len();
            let (logits, cache) = forward(&model, &batch, Mode::Train)?;

            let inv_bn = T::from_f64(1.0 / bn as f64);
            let mut dlogits = vec![T::zero(); bn * 2];
            for s in 0..bn {
                let pair = &logits[s * 2..s * 2 + 2];
                let sm = softmax_cross_entropy(pair, labels[s])?;
                loss_sum += sm.loss.to_f64();
                let predicted = if pair[1] > pair[0] { 1 } else { 0 };
                if predicted == labels[s] {
                    correct += 1;
                }
                for k in 0..2 {
                    dlogits[s * 2 + k] = sm.dlogits[k] * inv_bn;
                }
            }

            let grads = backward(&model, &cache, &dlogits)?;
            model.apply_bn_updates(&cache);
            let grad_arrays = grads.arrays();
            for ((param, vel), grad) in
                model.trainable_params_mut().into_iter().zip(velocity.iter_mut()).zip(grad_arrays)
            {
                sgd_step(param, vel, grad, lr, momentum)?;
            }
        }

        let stats = EpochStats {
            epoch,
            loss: loss_sum / n as f64,
            accuracy: correct as f64 / n as f64,
        };
        if !stats.loss.is_finite() {
            return Err(Error::Numeric(format!(
                "training loss became non-finite at epoch {epoch}"
            )));
        }
        history.epochs.push(stats);
    }
    Ok((model, history))
}
