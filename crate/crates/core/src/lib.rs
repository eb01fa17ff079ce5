//! Solar flare forecasting pipeline.
//!
//! The crate ingests a GOES-style flare event catalog and carries it through
//! the full modelling chain:
//!
//! - [`catalog`] — parsing, validation, and summary statistics for the event list
//! - [`preprocess`] — flux smoothing, waiting times, min-max scaling, and
//!   regularization onto a fixed 3-hour grid
//! - [`windows`] — labeled sliding windows, minority oversampling,
//!   chronological splits, and walk-forward folds
//! - [`decomposition`] — trend/seasonal split via padded moving average
//! - [`neuralnet`] — tensors, activations, dense and LSTM layers with full
//!   backpropagation through time, losses, optimizers, and a gradient checker
//! - [`models`] — the LSTM and decomposition-LSTM classifiers, bagged
//!   ensembles, and the experiment driver
//! - [`evaluation`] — confusion matrices, skill scores, ROC/AUC, and
//!   repeated-run aggregation
//! - [`socstats`] — power-law fitting with KS threshold selection and
//!   window-extrema distributions
//!
//! Everything is deterministic given (input, seed): model training, bootstrap
//! draws, and resampling all derive their randomness from explicit seeds.

pub mod catalog;
pub mod decomposition;
pub mod evaluation;
pub mod models;
pub mod neuralnet;
pub mod preprocess;
pub mod socstats;
pub mod windows;

pub use catalog::{FlareCatalog, FlareClass, FlareEvent};
pub use evaluation::{ConfusionMatrix, SkillReport};
pub use models::{ExperimentMode, TrainedModel};
pub use preprocess::{IrregularSeries, RegularSeries};
pub use socstats::PowerLawFit;
pub use windows::{Window, WindowSet};
