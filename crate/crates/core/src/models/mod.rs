//! Model assembly: the stacked-LSTM classifier, the decomposition-LSTM
//! classifier, training, bagged ensembles, the experiment driver, and flat
//! checkpoints.

mod checkpoint;
mod ensemble;
mod experiment;
mod training;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use ensemble::{ensemble_predict, member_seed, train_bagged, EnsembleConfig, TrainedEnsemble};
pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentError, ExperimentMode, ExperimentOutcome,
    SeedArtifacts, TrainedAny,
};
pub use training::{predict_label, predict_proba, train, TrainError, TrainedModel};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::{decompose, moving_average};
use crate::neuralnet::{
    Activation, ActivationLayer, DenseLayer, LstmLayer, NetError, Network, Parameter,
};

/// Stacked-LSTM classifier configuration: LSTM layers with alternating
/// relu/tanh activations between them, then a one-unit sigmoid head reading
/// the final hidden state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmModelConfig {
    pub input_size: usize,
    pub hidden_sizes: Vec<usize>,
}

impl LstmModelConfig {
    /// The default four-layer stack.
    pub fn new(input_size: usize) -> Self {
        LstmModelConfig {
            input_size,
            hidden_sizes: vec![64, 64, 32, 32],
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.input_size == 0 {
            return Err(NetError::InvalidConfig("input_size must be > 0".into()));
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.iter().any(|&h| h == 0) {
            return Err(NetError::InvalidConfig(
                "hidden_sizes must be nonempty and positive".into(),
            ));
        }
        Ok(())
    }
}

/// Decomposition-LSTM configuration: each input feature is split into trend
/// and smoothed-seasonal channels, a shared dense layer mixes the channels
/// per timestep, one LSTM layer follows, then two dense layers end in a
/// sigmoid unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DlstmModelConfig {
    pub input_size: usize,
    /// Moving-average window of the trend extraction; odd.
    pub kernel: usize,
    /// Moving-average window of the seasonal smoothing pass; odd.
    pub second_kernel: usize,
    /// Width of the shared dense layer on the decomposed channels.
    pub front_width: usize,
    pub lstm_hidden: usize,
    pub dense_hidden: usize,
}

impl DlstmModelConfig {
    pub fn new(input_size: usize) -> Self {
        DlstmModelConfig {
            input_size,
            kernel: 5,
            second_kernel: 5,
            front_width: 16,
            lstm_hidden: 64,
            dense_hidden: 32,
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.input_size == 0 {
            return Err(NetError::InvalidConfig("input_size must be > 0".into()));
        }
        for (name, k) in [("kernel", self.kernel), ("second_kernel", self.second_kernel)] {
            if k == 0 || k % 2 == 0 {
                return Err(NetError::InvalidConfig(format!(
                    "{name} must be odd and positive, got {k}"
                )));
            }
        }
        if self.front_width == 0 || self.lstm_hidden == 0 || self.dense_hidden == 0 {
            return Err(NetError::InvalidConfig("layer widths must be > 0".into()));
        }
        Ok(())
    }
}

/// Either classifier, for APIs that take one model description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Lstm(LstmModelConfig),
    Dlstm(DlstmModelConfig),
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        match self {
            ModelConfig::Lstm(c) => c.validate(),
            ModelConfig::Dlstm(c) => c.validate(),
        }
    }

    pub fn input_size(&self) -> usize {
        match self {
            ModelConfig::Lstm(c) => c.input_size,
            ModelConfig::Dlstm(c) => c.input_size,
        }
    }

    /// Builds a classifier with seeded weight initialization.
    pub fn build(&self, seed: u64) -> Result<ModelKind, NetError> {
        self.validate()?;
        Ok(match self {
            ModelConfig::Lstm(c) => ModelKind::Lstm(LstmClassifier::new(c, seed)),
            ModelConfig::Dlstm(c) => ModelKind::Dlstm(DlstmClassifier::new(c, seed)),
        })
    }

    /// Stable fingerprint of the architecture, mixed into checkpoints.
    pub fn fingerprint(&self) -> u64 {
        let text = match self {
            ModelConfig::Lstm(c) => format!("lstm in={} hidden={:?}", c.input_size, c.hidden_sizes),
            ModelConfig::Dlstm(c) => format!(
                "dlstm in={} k={} k2={} front={} hidden={} dense={}",
                c.input_size, c.kernel, c.second_kernel, c.front_width, c.lstm_hidden, c.dense_hidden
            ),
        };
        fnv1a(text.as_bytes())
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// A built classifier of either architecture.
pub enum ModelKind {
    Lstm(LstmClassifier),
    Dlstm(DlstmClassifier),
}

impl ModelKind {
    pub fn as_network(&self) -> &dyn Network {
        match self {
            ModelKind::Lstm(m) => m,
            ModelKind::Dlstm(m) => m,
        }
    }

    pub fn as_network_mut(&mut self) -> &mut dyn Network {
        match self {
            ModelKind::Lstm(m) => m,
            ModelKind::Dlstm(m) => m,
        }
    }

    pub fn config(&self) -> ModelConfig {
        match self {
            ModelKind::Lstm(m) => ModelConfig::Lstm(m.config.clone()),
            ModelKind::Dlstm(m) => ModelConfig::Dlstm(m.config.clone()),
        }
    }
}

/// Stacked LSTM layers with alternating relu/tanh between them and a sigmoid
/// head on the last hidden state.
pub struct LstmClassifier {
    pub config: LstmModelConfig,
    layers: Vec<LstmLayer>,
    inter: Vec<ActivationLayer>,
    head: DenseLayer,
}

impl LstmClassifier {
    pub fn new(config: &LstmModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(config.hidden_sizes.len());
        let mut inter = Vec::new();
        let mut in_size = config.input_size;
        for (i, &hidden) in config.hidden_sizes.iter().enumerate() {
            layers.push(LstmLayer::new(&format!("lstm{i}"), in_size, hidden, &mut rng));
            if i + 1 < config.hidden_sizes.len() {
                let activation = if i % 2 == 0 { Activation::Relu } else { Activation::Tanh };
                inter.push(ActivationLayer::new(activation));
            }
            in_size = hidden;
        }
        let head = DenseLayer::new("head", in_size, 1, Activation::Sigmoid, &mut rng);
        LstmClassifier {
            config: config.clone(),
            layers,
            inter,
            head,
        }
    }
}

impl Network for LstmClassifier {
    fn input_size(&self) -> usize {
        self.config.input_size
    }

    fn forward(&mut self, features: &[f64], seq_len: usize) -> Result<f64, NetError> {
        let mut x = features.to_vec();
        for i in 0..self.layers.len() {
            x = self.layers[i].forward(&x, seq_len)?;
            if i < self.inter.len() {
                x = self.inter[i].forward(&x);
            }
        }
        let hidden = self.layers.last().unwrap().hidden_size();
        let last = &x[(seq_len - 1) * hidden..];
        Ok(self.head.forward(last, 1)?[0])
    }

    fn infer(&self, features: &[f64], seq_len: usize) -> Result<f64, NetError> {
        let mut x = features.to_vec();
        for i in 0..self.layers.len() {
            x = self.layers[i].infer(&x, seq_len)?;
            if i < self.inter.len() {
                x = self.inter[i].infer(&x);
            }
        }
        let hidden = self.layers.last().unwrap().hidden_size();
        let last = &x[(seq_len - 1) * hidden..];
        Ok(self.head.infer(last, 1)?[0])
    }

    fn backward(&mut self, grad_prob: f64) -> Result<(), NetError> {
        let d_last = self.head.backward(&[grad_prob])?;
        let hidden = self.layers.last().unwrap().hidden_size();
        // the head only reads the final hidden state; expand its gradient to
        // a full sequence gradient for BPTT
        let seq_len = self.last_seq_len()?;
        let mut dh = vec![0.0; seq_len * hidden];
        dh[(seq_len - 1) * hidden..].copy_from_slice(&d_last);
        for i in (0..self.layers.len()).rev() {
            let dh_in = if i < self.inter.len() {
                self.inter[i].backward(&dh)?
            } else {
                dh
            };
            dh = self.layers[i].backward(&dh_in)?;
        }
        Ok(())
    }

    fn zero_grad(&mut self) {
        for layer in &mut self.layers {
            layer.zero_grad();
        }
        self.head.zero_grad();
    }

    fn parameters(&self) -> Vec<&Parameter> {
        let mut params: Vec<&Parameter> = self.layers.iter().flat_map(|l| l.parameters()).collect();
        params.extend(self.head.parameters());
        params
    }

    fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        let mut params: Vec<&mut Parameter> = self
            .layers
            .iter_mut()
            .flat_map(|l| l.parameters_mut())
            .collect();
        params.extend(self.head.parameters_mut());
        params
    }
}

impl LstmClassifier {
    fn last_seq_len(&self) -> Result<usize, NetError> {
        self.layers
            .last()
            .unwrap()
            .cached_seq_len()
            .ok_or(NetError::BackwardWithoutForward)
    }
}

/// Decomposition front block + shared dense layer + LSTM + two dense layers.
pub struct DlstmClassifier {
    pub config: DlstmModelConfig,
    front: DenseLayer,
    lstm: LstmLayer,
    mid: DenseLayer,
    head: DenseLayer,
}

impl DlstmClassifier {
    pub fn new(config: &DlstmModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let channels = 2 * config.input_size;
        // The front layer mixes the decomposed channels linearly; the tanh in
        // the middle keeps gradients alive at the small amplitudes the
        // decomposition produces.
        let front = DenseLayer::new("front", channels, config.front_width, Activation::Identity, &mut rng);
        let lstm = LstmLayer::new("lstm", config.front_width, config.lstm_hidden, &mut rng);
        let mid = DenseLayer::new("mid", config.lstm_hidden, config.dense_hidden, Activation::Tanh, &mut rng);
        let head = DenseLayer::new("head", config.dense_hidden, 1, Activation::Sigmoid, &mut rng);
        DlstmClassifier {
            config: config.clone(),
            front,
            lstm,
            mid,
            head,
        }
    }

    /// Splits every feature column into (trend, smoothed seasonal) channels.
    /// The residual noise of the second smoothing pass is discarded.
    fn decompose_input(&self, features: &[f64], seq_len: usize) -> Result<Vec<f64>, NetError> {
        let d = self.config.input_size;
        if features.len() != seq_len * d {
            return Err(NetError::ShapeMismatch(format!(
                "dlstm expects {} x {d} inputs, got {} values",
                seq_len,
                features.len()
            )));
        }
        let mut channels = vec![0.0; seq_len * 2 * d];
        let mut column = vec![0.0; seq_len];
        for c in 0..d {
            for t in 0..seq_len {
                column[t] = features[t * d + c];
            }
            let parts = decompose(&column, self.config.kernel)
                .map_err(|e| NetError::InvalidConfig(e.to_string()))?;
            let smoothed = moving_average(&parts.seasonal, self.config.second_kernel)
                .map_err(|e| NetError::InvalidConfig(e.to_string()))?;
            for t in 0..seq_len {
                channels[t * 2 * d + 2 * c] = parts.trend[t];
                channels[t * 2 * d + 2 * c + 1] = smoothed[t];
            }
        }
        Ok(channels)
    }
}

impl Network for DlstmClassifier {
    fn input_size(&self) -> usize {
        self.config.input_size
    }

    fn forward(&mut self, features: &[f64], seq_len: usize) -> Result<f64, NetError> {
        let channels = self.decompose_input(features, seq_len)?;
        let mixed = self.front.forward(&channels, seq_len)?;
        let hidden_seq = self.lstm.forward(&mixed, seq_len)?;
        let hidden = self.config.lstm_hidden;
        let last = &hidden_seq[(seq_len - 1) * hidden..];
        let mid = self.mid.forward(last, 1)?;
        Ok(self.head.forward(&mid, 1)?[0])
    }

    fn infer(&self, features: &[f64], seq_len: usize) -> Result<f64, NetError> {
        let channels = self.decompose_input(features, seq_len)?;
        let mixed = self.front.infer(&channels, seq_len)?;
        let hidden_seq = self.lstm.infer(&mixed, seq_len)?;
        let hidden = self.config.lstm_hidden;
        let last = &hidden_seq[(seq_len - 1) * hidden..];
        let mid = self.mid.infer(last, 1)?;
        Ok(self.head.infer(&mid, 1)?[0])
    }

    fn backward(&mut self, grad_prob: f64) -> Result<(), NetError> {
        let d_mid = self.head.backward(&[grad_prob])?;
        let d_last = self.mid.backward(&d_mid)?;
        let seq_len = self
            .lstm
            .cached_seq_len()
            .ok_or(NetError::BackwardWithoutForward)?;
        let hidden = self.config.lstm_hidden;
        let mut dh = vec![0.0; seq_len * hidden];
        dh[(seq_len - 1) * hidden..].copy_from_slice(&d_last);
        let d_mixed = self.lstm.backward(&dh)?;
        // the decomposition has no parameters; gradients stop at the front layer
        self.front.backward(&d_mixed)?;
        Ok(())
    }

    fn zero_grad(&mut self) {
        self.front.zero_grad();
        self.lstm.zero_grad();
        self.mid.zero_grad();
        self.head.zero_grad();
    }

    fn parameters(&self) -> Vec<&Parameter> {
        let mut params = self.front.parameters();
        params.extend(self.lstm.parameters());
        params.extend(self.mid.parameters());
        params.extend(self.head.parameters());
        params
    }

    fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        let mut params = self.front.parameters_mut();
        params.extend(self.lstm.parameters_mut());
        params.extend(self.mid.parameters_mut());
        params.extend(self.head.parameters_mut());
        params
    }
}
