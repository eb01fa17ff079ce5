//! Single-model training loop and inference.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{fnv1a, ModelConfig, ModelKind};
use crate::neuralnet::{bce_loss, bce_loss_grad, NetError, Network, Optimizer, TrainConfig};
use crate::windows::{Window, WindowSet};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("model expects {expected} features per timestep, windows carry {got}")]
    InputSizeMismatch { expected: usize, got: usize },
    #[error("loss became non-finite at epoch {epoch}, batch {batch} (max |grad| {max_abs_grad:e})")]
    NanLoss {
        epoch: usize,
        batch: usize,
        max_abs_grad: f64,
    },
    #[error("ensemble member {index} failed: {source}")]
    Member {
        index: usize,
        #[source]
        source: Box<TrainError>,
    },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// A trained classifier with its loss history and provenance.
pub struct TrainedModel {
    pub model: ModelKind,
    /// Mean training loss per epoch; length equals the configured epochs.
    pub history: Vec<f64>,
    /// Fingerprint of (model config, train config) for checkpoint audits.
    pub config_hash: u64,
    pub seed: u64,
}

impl TrainedModel {
    pub fn config(&self) -> ModelConfig {
        self.model.config()
    }
}

fn max_abs_grad(net: &dyn Network) -> f64 {
    net.parameters()
        .iter()
        .flat_map(|p| p.grad.data())
        .fold(0.0f64, |acc, g| acc.max(g.abs()))
}

pub(crate) fn train_fingerprint(config: &ModelConfig, tc: &TrainConfig) -> u64 {
    let text = format!(
        "{:016x} epochs={} batch={} lr={:e} opt={:?}",
        config.fingerprint(),
        tc.epochs,
        tc.batch_size,
        tc.learning_rate,
        tc.optimizer
    );
    fnv1a(text.as_bytes())
}

/// Trains one classifier: `epochs` passes over seeded reshuffles of the
/// training windows in batches of `batch_size`, BCE loss, one optimizer step
/// per batch. Deterministic given (config, data, seed).
pub fn train(
    config: &ModelConfig,
    train_set: &WindowSet,
    tc: &TrainConfig,
) -> Result<TrainedModel, TrainError> {
    tc.validate()?;
    config.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    if config.input_size() != train_set.d {
        return Err(TrainError::InputSizeMismatch {
            expected: config.input_size(),
            got: train_set.d,
        });
    }

    let mut model = config.build(tc.seed)?;
    let mut optimizer = Optimizer::new(tc.optimizer, tc.learning_rate);
    // distinct stream from weight initialization
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(tc.seed.wrapping_add(0x9e3779b97f4a7c15));
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(tc.epochs);

    for epoch in 0..tc.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for (batch_idx, batch) in order.chunks(tc.batch_size).enumerate() {
            let net = model.as_network_mut();
            net.zero_grad();
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                let window = &train_set.windows[i];
                let p = net.forward(&window.features, train_set.w)?;
                let y = if window.is_large() { 1.0 } else { 0.0 };
                batch_loss += bce_loss(p, y);
                net.backward(bce_loss_grad(p, y) * scale)?;
            }
            if !batch_loss.is_finite() {
                return Err(TrainError::NanLoss {
                    epoch,
                    batch: batch_idx,
                    max_abs_grad: max_abs_grad(net),
                });
            }
            optimizer.step(&mut net.parameters_mut()).map_err(|e| match e {
                NetError::NonFiniteGradient { .. } => TrainError::NanLoss {
                    epoch,
                    batch: batch_idx,
                    max_abs_grad: max_abs_grad(model.as_network()),
                },
                other => TrainError::Net(other),
            })?;
            epoch_loss += batch_loss;
        }
        history.push(epoch_loss / train_set.len() as f64);
    }

    Ok(TrainedModel {
        model,
        history,
        config_hash: train_fingerprint(config, tc),
        seed: tc.seed,
    })
}

/// Positive-class probability for one window; thread-safe.
pub fn predict_proba(model: &TrainedModel, window: &Window, w: usize) -> Result<f64, NetError> {
    model.model.as_network().infer(&window.features, w)
}

/// Thresholded prediction (default threshold 0.5).
pub fn predict_label(model: &TrainedModel, window: &Window, w: usize, threshold: f64) -> Result<bool, NetError> {
    Ok(predict_proba(model, window, w)? >= threshold)
}
