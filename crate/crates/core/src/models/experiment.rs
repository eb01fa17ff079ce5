//! Experiment driver: for each seed, split chronologically, fit the scaler on
//! the training side only, oversample the minority class, train, and score on
//! the held-out tail. Runs aggregate into a [`SkillReport`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ensemble::{ensemble_predict, train_bagged, EnsembleConfig, TrainedEnsemble};
use super::training::{predict_proba, train, TrainError, TrainedModel};
use super::{DlstmModelConfig, LstmModelConfig, ModelConfig};
use crate::evaluation::{
    aggregate_runs, confusion, roc_auc, skill_scores, EvalError, RocPoint, RunMetrics, SkillReport,
};
use crate::neuralnet::{NetError, TrainConfig};
use crate::preprocess::MinMaxParams;
use crate::windows::{
    apply_feature_minmax, chronological_split, fit_feature_minmax, oversample_minority,
    ResampleConfig, WindowError, WindowMode, WindowSet,
};

/// The six model/series pairings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMode {
    LstmIrregular,
    DlstmIrregular,
    LstmRegular,
    DlstmRegular,
    LstmEnsembleRegular,
    DlstmEnsembleRegular,
}

impl ExperimentMode {
    pub const ALL: [ExperimentMode; 6] = [
        ExperimentMode::LstmIrregular,
        ExperimentMode::DlstmIrregular,
        ExperimentMode::LstmRegular,
        ExperimentMode::DlstmRegular,
        ExperimentMode::LstmEnsembleRegular,
        ExperimentMode::DlstmEnsembleRegular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentMode::LstmIrregular => "lstm-irregular",
            ExperimentMode::DlstmIrregular => "dlstm-irregular",
            ExperimentMode::LstmRegular => "lstm-regular",
            ExperimentMode::DlstmRegular => "dlstm-regular",
            ExperimentMode::LstmEnsembleRegular => "lstm-ensemble-regular",
            ExperimentMode::DlstmEnsembleRegular => "dlstm-ensemble-regular",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == text)
    }

    pub fn is_ensemble(self) -> bool {
        matches!(
            self,
            ExperimentMode::LstmEnsembleRegular | ExperimentMode::DlstmEnsembleRegular
        )
    }

    pub fn is_dlstm(self) -> bool {
        matches!(
            self,
            ExperimentMode::DlstmIrregular
                | ExperimentMode::DlstmRegular
                | ExperimentMode::DlstmEnsembleRegular
        )
    }

    /// The window mode this experiment consumes.
    pub fn window_mode(self) -> WindowMode {
        match self {
            ExperimentMode::LstmIrregular | ExperimentMode::DlstmIrregular => WindowMode::Irregular,
            _ => WindowMode::Regular,
        }
    }
}

impl std::fmt::Display for ExperimentMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("window mode {got:?} does not match experiment mode {mode}")]
    WrongWindowMode { mode: &'static str, got: WindowMode },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Windows(#[from] WindowError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Everything one experiment needs besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: ExperimentMode,
    pub resample: ResampleConfig,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub train_fraction: f64,
    /// Architecture for the LSTM modes; `input_size` is overridden from the data.
    pub lstm: LstmModelConfig,
    /// Architecture for the DLSTM modes; `input_size` is overridden from the data.
    pub dlstm: DlstmModelConfig,
    pub ensemble: EnsembleConfig,
    /// Worker threads for ensemble members (1 = sequential).
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(mode: ExperimentMode) -> Self {
        ExperimentConfig {
            mode,
            resample: ResampleConfig::new(12),
            seeds: vec![1],
            train: TrainConfig::default(),
            train_fraction: 0.8,
            lstm: LstmModelConfig::new(1),
            dlstm: DlstmModelConfig::new(1),
            ensemble: EnsembleConfig::default(),
            jobs: 1,
        }
    }

    fn model_config(&self, input_size: usize) -> ModelConfig {
        if self.mode.is_dlstm() {
            ModelConfig::Dlstm(DlstmModelConfig {
                input_size,
                ..self.dlstm.clone()
            })
        } else {
            ModelConfig::Lstm(LstmModelConfig {
                input_size,
                hidden_sizes: self.lstm.hidden_sizes.clone(),
            })
        }
    }
}

/// A single model or an ensemble, for uniform prediction.
pub enum TrainedAny {
    Single(TrainedModel),
    Ensemble(TrainedEnsemble),
}

impl TrainedAny {
    pub fn predict(&self, window: &crate::windows::Window, w: usize) -> Result<f64, NetError> {
        match self {
            TrainedAny::Single(m) => predict_proba(m, window, w),
            TrainedAny::Ensemble(e) => ensemble_predict(e, window, w),
        }
    }
}

/// What one seed's run leaves behind.
pub struct SeedArtifacts {
    pub seed: u64,
    /// Scaler fitted on the training partition only.
    pub normalization: Vec<MinMaxParams>,
    pub model: TrainedAny,
    pub metrics: RunMetrics,
}

/// Report plus per-seed artifacts (models and scalers) for checkpointing.
pub struct ExperimentOutcome {
    pub report: SkillReport,
    pub artifacts: Vec<SeedArtifacts>,
}

/// Runs the configured experiment over raw (unnormalized) windows.
pub fn run_experiment(
    windows: &WindowSet,
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutcome, ExperimentError> {
    if windows.mode != cfg.mode.window_mode() {
        return Err(ExperimentError::WrongWindowMode {
            mode: cfg.mode.name(),
            got: windows.mode,
        });
    }
    if cfg.seeds.is_empty() {
        return Err(ExperimentError::InsufficientData("no seeds configured".into()));
    }
    let (train_raw, test_raw) = chronological_split(windows, cfg.train_fraction);
    if train_raw.is_empty() || test_raw.is_empty() {
        return Err(ExperimentError::InsufficientData(format!(
            "split of {} windows leaves train={}, test={}",
            windows.len(),
            train_raw.len(),
            test_raw.len()
        )));
    }

    let normalization = fit_feature_minmax(&train_raw)?;
    let train_scaled = apply_feature_minmax(&train_raw, &normalization)?;
    let test_scaled = apply_feature_minmax(&test_raw, &normalization)?;
    let model_config = cfg.model_config(windows.d);

    let mut artifacts = Vec::with_capacity(cfg.seeds.len());
    let mut runs = Vec::with_capacity(cfg.seeds.len());
    let mut first_roc: Option<Vec<RocPoint>> = None;

    for &seed in &cfg.seeds {
        let train_set = oversample_minority(&train_scaled, &cfg.resample, seed);
        let tc = TrainConfig { seed, ..cfg.train };
        let model = if cfg.mode.is_ensemble() {
            TrainedAny::Ensemble(train_bagged(
                &model_config,
                &cfg.ensemble,
                &train_set,
                &tc,
                cfg.jobs,
            )?)
        } else {
            TrainedAny::Single(train(&model_config, &train_set, &tc)?)
        };

        let mut labels = Vec::with_capacity(test_scaled.len());
        let mut probs = Vec::with_capacity(test_scaled.len());
        for window in &test_scaled.windows {
            labels.push(window.is_large());
            probs.push(model.predict(window, test_scaled.w)?);
        }
        let cm = confusion(&labels, &probs, 0.5)?;
        let scores = skill_scores(&cm);
        let auc = match roc_auc(&labels, &probs) {
            Ok((points, auc)) => {
                if first_roc.is_none() {
                    first_roc = Some(points);
                }
                Some(auc)
            }
            Err(EvalError::SingleClass) => None,
            Err(other) => return Err(other.into()),
        };
        let metrics = RunMetrics { scores, auc };
        runs.push(metrics);
        artifacts.push(SeedArtifacts {
            seed,
            normalization: normalization.clone(),
            model,
            metrics,
        });
    }

    let report = SkillReport {
        mode: cfg.mode.name().to_string(),
        r: cfg.resample.r,
        seeds: cfg.seeds.clone(),
        metrics: aggregate_runs(&runs)?,
        roc: first_roc.unwrap_or_default(),
    };
    Ok(ExperimentOutcome { report, artifacts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::AggregateMetric;
    use crate::models::training::tests::planted_rule_set;
    use crate::neuralnet::OptimizerKind;

    fn quick_config(mode: ExperimentMode, r: u32, seeds: Vec<u64>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(mode);
        cfg.resample = ResampleConfig::new(r);
        cfg.seeds = seeds;
        cfg.train = TrainConfig {
            epochs: 8,
            batch_size: 32,
            learning_rate: 5e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
        };
        cfg.lstm.hidden_sizes = vec![6];
        cfg.dlstm.kernel = 3;
        cfg.dlstm.second_kernel = 3;
        cfg.dlstm.front_width = 4;
        cfg.dlstm.lstm_hidden = 6;
        cfg.dlstm.dense_hidden = 4;
        cfg.ensemble.members = 2;
        cfg
    }

    #[test]
    fn single_seed_reports_zero_std() {
        let set = planted_rule_set(300, 0.3, 8, 20);
        let cfg = quick_config(ExperimentMode::LstmRegular, 0, vec![5]);
        let outcome = run_experiment(&set, &cfg).unwrap();
        match outcome.report.metrics.accuracy {
            AggregateMetric::Defined { std, .. } => assert_eq!(std, 0.0),
            _ => panic!("accuracy must be defined"),
        }
        assert_eq!(outcome.artifacts.len(), 1);
        assert_eq!(outcome.report.r, 0);
    }

    #[test]
    fn wrong_window_mode_is_rejected() {
        let set = planted_rule_set(100, 0.3, 8, 21);
        let cfg = quick_config(ExperimentMode::LstmIrregular, 0, vec![1]);
        assert!(matches!(
            run_experiment(&set, &cfg),
            Err(ExperimentError::WrongWindowMode { .. })
        ));
    }

    #[test]
    fn insufficient_data_is_an_error() {
        let set = planted_rule_set(1, 0.0, 8, 22);
        let cfg = quick_config(ExperimentMode::LstmRegular, 0, vec![1]);
        assert!(matches!(
            run_experiment(&set, &cfg),
            Err(ExperimentError::InsufficientData(_))
        ));
    }

    #[test]
    fn reruns_are_identical() {
        let set = planted_rule_set(250, 0.3, 8, 23);
        let cfg = quick_config(ExperimentMode::DlstmRegular, 6, vec![3, 4]);
        let a = run_experiment(&set, &cfg).unwrap();
        let b = run_experiment(&set, &cfg).unwrap();
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in ExperimentMode::ALL {
            assert_eq!(ExperimentMode::parse(mode.name()), Some(mode));
        }
        assert_eq!(ExperimentMode::parse("nonsense"), None);
    }
}
