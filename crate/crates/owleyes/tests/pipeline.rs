//! Integration checks of the training/evaluation contracts that need real
//! images and the full model.

use owleyes::demo::{write_demo_corpus, DemoOptions};
use owleyes::model::{
    backward, build_model, forward, predict, train, Mode, Model, ModelConfig, TrainHyper,
};
use owleyes::nn::{sgd_step, softmax_cross_entropy};
use owleyes::raster::load_rgb;
use owleyes::rng::SplitMix64;
use owleyes::synth::{generate_dataset, DatasetManifest, GenerateOptions, IssueCategory};
use owleyes::Tensor4;
use std::sync::OnceLock;
use tempfile::TempDir;

fn tiny_dataset() -> &'static (TempDir, DatasetManifest) {
    static DATA: OnceLock<(TempDir, DatasetManifest)> = OnceLock::new();
    DATA.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let corpus = dir.path().join("corpus");
        write_demo_corpus(&corpus, &DemoOptions { screens: 4, seed: 2, ..Default::default() })
            .unwrap();
        let manifest = generate_dataset(
            &corpus,
            &dir.path().join("data"),
            &GenerateOptions {
                count: 6,
                categories: vec![IssueCategory::BlurredScreen, IssueCategory::MissingImage],
                master_seed: 4,
                threads: 0,
            },
        )
        .unwrap();
        (dir, manifest)
    })
}

fn seeded_batch(cfg: &ModelConfig, n: usize, seed: u64) -> (Tensor4<f64>, Vec<usize>) {
    let mut rng = SplitMix64::new(seed);
    let len = n * cfg.input_channels * cfg.input_height * cfg.input_width;
    let data: Vec<f64> = (0..len).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let batch =
        Tensor4::from_vec(n, cfg.input_channels, cfg.input_height, cfg.input_width, data).unwrap();
    let labels = (0..n).map(|i| i % 2).collect();
    (batch, labels)
}

fn mean_loss(model: &Model<f64>, batch: &Tensor4<f64>, labels: &[usize]) -> f64 {
    let (logits, _) = forward(model, batch, Mode::Train).unwrap();
    labels
        .iter()
        .enumerate()
        .map(|(s, &l)| softmax_cross_entropy(&logits[s * 2..s * 2 + 2], l).unwrap().loss)
        .sum::<f64>()
        / labels.len() as f64
}

#[test]
fn one_small_sgd_step_strictly_decreases_loss() {
    let cfg = ModelConfig::desk();
    let mut model: Model<f64> = build_model(&cfg, 0x10).unwrap();
    let (batch, labels) = seeded_batch(&cfg, 4, 0x20);

    let loss_before = mean_loss(&model, &batch, &labels);
    let (logits, cache) = forward(&model, &batch, Mode::Train).unwrap();
    let mut dlogits = vec![0.0f64; labels.len() * 2];
    for (s, &label) in labels.iter().enumerate() {
        let sm = softmax_cross_entropy(&logits[s * 2..s * 2 + 2], label).unwrap();
        for k in 0..2 {
            dlogits[s * 2 + k] = sm.dlogits[k] / labels.len() as f64;
        }
    }
    let grads = backward(&model, &cache, &dlogits).unwrap();
    let grad_arrays: Vec<Vec<f64>> = grads.arrays().iter().map(|a| a.to_vec()).collect();
    let mut velocity: Vec<Vec<f64>> =
        model.trainable_params().iter().map(|p| vec![0.0; p.len()]).collect();
    for ((param, vel), grad) in model
        .trainable_params_mut()
        .into_iter()
        .zip(velocity.iter_mut())
        .zip(grad_arrays.iter())
    {
        sgd_step(param, vel, grad, 1e-3, 0.0).unwrap();
    }
    let loss_after = mean_loss(&model, &batch, &labels);
    assert!(
        loss_after < loss_before,
        "loss did not decrease: {loss_before} -> {loss_after}"
    );
}

#[test]
fn training_is_deterministic_and_epochs_zero_is_a_noop() {
    let (_, manifest) = tiny_dataset();
    let cfg = ModelConfig::desk();
    let hyper = TrainHyper { epochs: 2, batch_size: 4, lr: 0.01, momentum: 0.9, seed: 8 };

    let run = || {
        let model: Model<f32> = build_model(&cfg, 1).unwrap();
        train(model, manifest, &hyper).unwrap()
    };
    let (m1, h1) = run();
    let (m2, h2) = run();
    assert_eq!(h1, h2, "histories differ across identical runs");
    assert_eq!(m1, m2, "models differ across identical runs");

    let fresh: Model<f32> = build_model(&cfg, 1).unwrap();
    let (unchanged, history) =
        train(fresh.clone(), manifest, &TrainHyper { epochs: 0, ..hyper }).unwrap();
    assert_eq!(unchanged, fresh);
    assert!(history.epochs.is_empty());
}

#[test]
fn single_class_manifest_warns_but_trains() {
    let (_, manifest) = tiny_dataset();
    let mut bugs_only = manifest.clone();
    bugs_only.rows.retain(|r| r.label == owleyes::synth::Label::Bug);
    let model: Model<f32> = build_model(&ModelConfig::desk(), 2).unwrap();
    let hyper = TrainHyper { epochs: 1, batch_size: 4, lr: 0.01, momentum: 0.9, seed: 1 };
    let (_, history) = train(model, &bugs_only, &hyper).unwrap();
    assert_eq!(history.warnings.len(), 1);
    assert!(history.warnings[0].contains("single class"), "{:?}", history.warnings);
    assert_eq!(history.epochs.len(), 1);
}

#[test]
fn empty_manifest_is_rejected() {
    let (_, manifest) = tiny_dataset();
    let mut empty = manifest.clone();
    empty.rows.clear();
    let model: Model<f32> = build_model(&ModelConfig::desk(), 2).unwrap();
    let hyper = TrainHyper::default();
    assert!(train(model, &empty, &hyper).is_err());
}

#[test]
fn evaluate_is_permutation_invariant() {
    let (_, manifest) = tiny_dataset();
    let model: Model<f32> = build_model(&ModelConfig::desk(), 3).unwrap();
    let forward_order = owleyes::model::evaluate(&model, manifest).unwrap();

    let mut reversed = manifest.clone();
    reversed.rows.reverse();
    let reverse_order = owleyes::model::evaluate(&model, &reversed).unwrap();
    assert_eq!(forward_order, reverse_order);
}

#[test]
fn untrained_predictions_are_deterministic() {
    let (_, manifest) = tiny_dataset();
    let model: Model<f32> = build_model(&ModelConfig::desk(), 5).unwrap();
    let row = manifest.rows.first().unwrap();
    let img = load_rgb(&manifest.resolve(row)).unwrap();
    let a = predict(&model, &img).unwrap();
    let b = predict(&model, &img).unwrap();
    assert_eq!(a.bug_probability.to_bits(), b.bug_probability.to_bits());
    assert!((0.0..=1.0).contains(&a.bug_probability));
}
