//! Versioned flat checkpoint format: model kind, architecture, seed, config
//! hash, scaler parameters, and raw parameter values. Floats are written in
//! shortest round-trip form, so save/load is exact.

use std::io::{BufRead, BufReader, Read, Write};

use thiserror::Error;

use super::training::TrainedModel;
use super::{DlstmModelConfig, LstmModelConfig, ModelConfig, ModelKind};
use crate::preprocess::MinMaxParams;

const MAGIC: &str = "flarecast-checkpoint v1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("checkpoint/model mismatch: {0}")]
    Mismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Net(#[from] crate::neuralnet::NetError),
}

/// A restored model plus the training-side scaler it expects.
pub struct Checkpoint {
    pub model: ModelKind,
    pub seed: u64,
    pub config_hash: u64,
    pub normalization: Vec<MinMaxParams>,
}

fn config_line(config: &ModelConfig) -> String {
    match config {
        ModelConfig::Lstm(c) => {
            let hidden: Vec<String> = c.hidden_sizes.iter().map(|h| h.to_string()).collect();
            format!("config lstm input={} hidden={}", c.input_size, hidden.join(","))
        }
        ModelConfig::Dlstm(c) => format!(
            "config dlstm input={} kernel={} second_kernel={} front={} lstm_hidden={} dense={}",
            c.input_size, c.kernel, c.second_kernel, c.front_width, c.lstm_hidden, c.dense_hidden
        ),
    }
}

fn parse_config_line(line: &str) -> Result<ModelConfig, CheckpointError> {
    let bad = |what: &str| CheckpointError::Malformed(format!("config line: {what}"));
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("config") {
        return Err(bad("missing `config`"));
    }
    let kind = tokens.next().ok_or_else(|| bad("missing kind"))?;
    let mut fields = std::collections::BTreeMap::new();
    for token in tokens {
        let (key, value) = token.split_once('=').ok_or_else(|| bad("missing `=`"))?;
        fields.insert(key.to_string(), value.to_string());
    }
    let get = |key: &str| {
        fields
            .get(key)
            .ok_or_else(|| bad(&format!("missing `{key}`")))
            .cloned()
    };
    let int = |key: &str| -> Result<usize, CheckpointError> {
        get(key)?.parse().map_err(|_| bad(&format!("bad `{key}`")))
    };
    match kind {
        "lstm" => {
            let hidden_sizes = get("hidden")?
                .split(',')
                .map(|h| h.parse().map_err(|_| bad("bad hidden size")))
                .collect::<Result<Vec<usize>, _>>()?;
            Ok(ModelConfig::Lstm(LstmModelConfig {
                input_size: int("input")?,
                hidden_sizes,
            }))
        }
        "dlstm" => Ok(ModelConfig::Dlstm(DlstmModelConfig {
            input_size: int("input")?,
            kernel: int("kernel")?,
            second_kernel: int("second_kernel")?,
            front_width: int("front")?,
            lstm_hidden: int("lstm_hidden")?,
            dense_hidden: int("dense")?,
        })),
        other => Err(bad(&format!("unknown kind `{other}`"))),
    }
}

/// Writes a trained model (and the scaler it was trained behind) to the flat
/// text format.
pub fn save_checkpoint<W: Write>(
    trained: &TrainedModel,
    normalization: &[MinMaxParams],
    mut out: W,
) -> Result<(), CheckpointError> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "{}", config_line(&trained.config()))?;
    writeln!(out, "seed {}", trained.seed)?;
    writeln!(out, "config_hash {:016x}", trained.config_hash)?;
    for p in normalization {
        writeln!(out, "norm {} {:e} {:e}", p.feature, p.observed_min, p.observed_max)?;
    }
    let net = trained.model.as_network();
    let params = net.parameters();
    writeln!(out, "params {}", params.len())?;
    for p in params {
        let dims: Vec<String> = p.value.shape().iter().map(|d| d.to_string()).collect();
        writeln!(out, "param {} {} {}", p.name, p.value.shape().len(), dims.join(" "))?;
        let mut first = true;
        for v in p.value.data() {
            if !first {
                write!(out, " ")?;
            }
            write!(out, "{v:e}")?;
            first = false;
        }
        writeln!(out)?;
    }
    writeln!(out, "end")?;
    Ok(())
}

/// Restores a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint<R: Read>(input: R) -> Result<Checkpoint, CheckpointError> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let mut next_line = || -> Result<String, CheckpointError> {
        lines
            .next()
            .ok_or_else(|| CheckpointError::Malformed("unexpected end of file".into()))?
            .map_err(CheckpointError::Io)
    };

    if next_line()?.trim() != MAGIC {
        return Err(CheckpointError::Malformed("bad magic line".into()));
    }
    let config = parse_config_line(&next_line()?)?;
    let seed_line = next_line()?;
    let seed: u64 = seed_line
        .strip_prefix("seed ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| CheckpointError::Malformed("bad seed line".into()))?;
    let hash_line = next_line()?;
    let config_hash = hash_line
        .strip_prefix("config_hash ")
        .and_then(|s| u64::from_str_radix(s.trim(), 16).ok())
        .ok_or_else(|| CheckpointError::Malformed("bad config_hash line".into()))?;

    let mut normalization = Vec::new();
    let params_line = loop {
        let line = next_line()?;
        if let Some(rest) = line.strip_prefix("norm ") {
            let mut parts = rest.split_whitespace();
            let feature = parts
                .next()
                .ok_or_else(|| CheckpointError::Malformed("bad norm line".into()))?
                .to_string();
            let lo: f64 = parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CheckpointError::Malformed("bad norm min".into()))?;
            let hi: f64 = parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CheckpointError::Malformed("bad norm max".into()))?;
            normalization.push(MinMaxParams {
                feature,
                observed_min: lo,
                observed_max: hi,
            });
        } else {
            break line;
        }
    };
    let param_count: usize = params_line
        .strip_prefix("params ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| CheckpointError::Malformed("bad params line".into()))?;

    let mut model = config.build(seed)?;
    {
        let net = model.as_network_mut();
        let mut params = net.parameters_mut();
        if params.len() != param_count {
            return Err(CheckpointError::Mismatch(format!(
                "model has {} parameters, checkpoint has {param_count}",
                params.len()
            )));
        }
        for param in params.iter_mut() {
            let header = next_line()?;
            let mut tokens = header.split_whitespace();
            if tokens.next() != Some("param") {
                return Err(CheckpointError::Malformed("expected param header".into()));
            }
            let name = tokens
                .next()
                .ok_or_else(|| CheckpointError::Malformed("param header missing name".into()))?;
            if name != param.name {
                return Err(CheckpointError::Mismatch(format!(
                    "parameter order mismatch: expected `{}`, found `{name}`",
                    param.name
                )));
            }
            let rank: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| CheckpointError::Malformed("bad param rank".into()))?;
            let dims: Vec<usize> = tokens
                .take(rank)
                .map(|t| t.parse().map_err(|_| CheckpointError::Malformed("bad dim".into())))
                .collect::<Result<_, _>>()?;
            if dims != param.value.shape() {
                return Err(CheckpointError::Mismatch(format!(
                    "`{name}` shape {dims:?} does not match model {:?}",
                    param.value.shape()
                )));
            }
            let values_line = next_line()?;
            let values: Vec<f64> = values_line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| CheckpointError::Malformed("bad value".into())))
                .collect::<Result<_, _>>()?;
            if values.len() != param.value.numel() {
                return Err(CheckpointError::Mismatch(format!(
                    "`{name}` has {} values, expected {}",
                    values.len(),
                    param.value.numel()
                )));
            }
            param.value.data_mut().copy_from_slice(&values);
        }
    }
    if next_line()?.trim() != "end" {
        return Err(CheckpointError::Malformed("missing end marker".into()));
    }
    Ok(Checkpoint {
        model,
        seed,
        config_hash,
        normalization,
    })
}
