//! Minimal from-scratch neural network core: tensors, activations, dense and
//! LSTM layers with full backpropagation through time, binary cross-entropy,
//! optimizers, and a finite-difference gradient checker.
//!
//! All arithmetic is 64-bit. A layer owns its forward cache, so a single
//! model instance is single-threaded during training; `infer` paths are
//! cache-free and take `&self`.

mod dense;
mod gradcheck;
mod loss;
mod lstm;
mod optimizer;

pub use dense::{ActivationLayer, DenseLayer};
pub use gradcheck::{grad_check, GradCheckReport};
pub use loss::{bce_loss, bce_loss_grad, BCE_EPSILON};
pub use lstm::LstmLayer;
pub use optimizer::{Optimizer, OptimizerKind};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("backward called without a cached forward pass")]
    BackwardWithoutForward,
    #[error("non-finite gradient in `{param}` (max |grad| so far {max_abs:e})")]
    NonFiniteGradient { param: String, max_abs: f64 },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// Dense row-major value block.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let numel = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; numel],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self, NetError> {
        let numel: usize = shape.iter().product();
        if data.len() != numel {
            return Err(NetError::ShapeMismatch(format!(
                "shape {shape:?} needs {numel} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// A trainable value with its gradient accumulator (same shape).
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
}

impl Parameter {
    pub fn zeros(name: &str, shape: &[usize]) -> Self {
        Parameter {
            name: name.to_string(),
            value: Tensor::zeros(shape),
            grad: Tensor::zeros(shape),
        }
    }

    /// Fills the value uniformly in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn init_uniform(&mut self, fan_in: usize, rng: &mut ChaCha8Rng) {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        for v in self.value.data_mut() {
            *v = rng.gen_range(-bound..=bound);
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.data_mut().fill(0.0);
    }
}

/// Overflow-safe logistic function; branches on the sign of `x`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Scalar activation functions with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn value(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output.
    pub fn deriv_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

/// Training hyperparameters. The loss is always binary cross-entropy on the
/// sigmoid output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 128,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.epochs < 1 {
            return Err(NetError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(NetError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(NetError::InvalidConfig("learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// A differentiable binary classifier over fixed-length sequences.
///
/// `forward` caches intermediates for `backward`; `infer` is the pure,
/// thread-safe inference path and computes the same value as `forward`.
pub trait Network {
    /// Features per timestep the network expects.
    fn input_size(&self) -> usize;

    /// Runs the network over `seq_len` timesteps of `input_size` features,
    /// returning the positive-class probability. Caches for `backward`.
    fn forward(&mut self, features: &[f64], seq_len: usize) -> Result<f64, NetError>;

    /// Cache-free forward pass.
    fn infer(&self, features: &[f64], seq_len: usize) -> Result<f64, NetError>;

    /// Accumulates `d(loss)/d(parameter)` for the loss gradient w.r.t. the
    /// output probability. Consumes the cached forward pass.
    fn backward(&mut self, grad_prob: f64) -> Result<(), NetError>;

    fn zero_grad(&mut self);

    fn parameters(&self) -> Vec<&Parameter>;

    fn parameters_mut(&mut self) -> Vec<&mut Parameter>;
}
