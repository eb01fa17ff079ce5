//! Labeled sliding windows over flare series, minority oversampling,
//! chronological splits, and walk-forward folds.
//!
//! A window holds `w` consecutive series elements as its feature matrix and is
//! labeled by the class of the element that follows it. Windows built from a
//! regularized series never straddle run boundaries.

use std::io::{BufRead, BufReader, Read, Write};

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::FlareClass;
use crate::preprocess::{class_of_regular_value, IrregularSeries, MinMaxParams, RegularSeries};

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("need at least {needed} windows for {what}, got {got}")]
    NotEnoughWindows {
        needed: usize,
        got: usize,
        what: &'static str,
    },
    #[error("regular-series value not classifiable: {0}")]
    Unclassifiable(#[from] crate::catalog::CatalogError),
    #[error("normalization expects {expected} feature params, got {got}")]
    BadNormalization { expected: usize, got: usize },
    #[error("malformed window file: {0}")]
    Malformed(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Binary flare size label; `Large` covers the M and X classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinaryLabel {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    Irregular,
    Regular,
}

/// One labeled sliding window: a `w x d` feature matrix (timestep-major) plus
/// the class of the following element.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    /// Feature values, `w` rows of `d` columns.
    pub features: Vec<f64>,
    /// Class of the predicted (w+1)-th element.
    pub class: FlareClass,
    /// Index of the predicted element in its source series.
    pub anchor_index: usize,
    /// Timestamp of the predicted element.
    pub anchor_time: DateTime<Utc>,
    /// Smallest raw flux inside the window (before any normalization).
    pub min_flux: f64,
    /// Largest raw flux inside the window.
    pub max_flux: f64,
}

impl Window {
    pub fn binary_label(&self) -> BinaryLabel {
        if self.class.is_large() {
            BinaryLabel::Large
        } else {
            BinaryLabel::Small
        }
    }

    pub fn is_large(&self) -> bool {
        self.class.is_large()
    }
}

/// Ordered collection of windows with shared geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    pub windows: Vec<Window>,
    /// Window length (rows per feature matrix).
    pub w: usize,
    /// Feature count per timestep (2 for irregular flux+waiting, 1 for regular flux).
    pub d: usize,
    pub mode: WindowMode,
    /// Identifier of the source series, for audit trails.
    pub provenance: String,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    fn like(&self, windows: Vec<Window>) -> WindowSet {
        WindowSet {
            windows,
            w: self.w,
            d: self.d,
            mode: self.mode,
            provenance: self.provenance.clone(),
        }
    }
}

/// Builds windows over the irregular series: `d = 2` features per timestep
/// (peak flux, waiting time), labeled by the class of the next flare.
/// A series shorter than `w + 1` yields an empty set.
pub fn build_irregular_windows(series: &IrregularSeries, w: usize) -> WindowSet {
    let entries = &series.entries;
    let count = entries.len().saturating_sub(w);
    let mut windows = Vec::with_capacity(count);
    for start in 0..count {
        let anchor = &entries[start + w];
        let mut features = Vec::with_capacity(w * 2);
        let mut min_flux = f64::INFINITY;
        let mut max_flux = f64::NEG_INFINITY;
        for entry in &entries[start..start + w] {
            features.push(entry.peak_flux);
            features.push(entry.waiting_time);
            min_flux = min_flux.min(entry.peak_flux);
            max_flux = max_flux.max(entry.peak_flux);
        }
        windows.push(Window {
            features,
            class: anchor.flare_class,
            anchor_index: start + w,
            anchor_time: anchor.peak_time,
            min_flux,
            max_flux,
        });
    }
    WindowSet {
        windows,
        w,
        d: 2,
        mode: WindowMode::Irregular,
        provenance: "irregular".into(),
    }
}

/// Builds windows over the regularized series: `d = 1` feature per timestep
/// (interval max flux), labeled by the class of the next interval's value.
/// Windows never straddle run boundaries.
pub fn build_regular_windows(series: &RegularSeries, w: usize) -> Result<WindowSet, WindowError> {
    let mut windows = Vec::new();
    let mut offset = 0usize;
    for run in &series.segments {
        let values = &run.values;
        let count = values.len().saturating_sub(w);
        for start in 0..count {
            let (anchor_time, anchor_flux) = values[start + w];
            let mut features = Vec::with_capacity(w);
            let mut min_flux = f64::INFINITY;
            let mut max_flux = f64::NEG_INFINITY;
            for &(_, flux) in &values[start..start + w] {
                features.push(flux);
                min_flux = min_flux.min(flux);
                max_flux = max_flux.max(flux);
            }
            windows.push(Window {
                features,
                class: class_of_regular_value(anchor_flux)?,
                anchor_index: offset + start + w,
                anchor_time,
                min_flux,
                max_flux,
            });
        }
        offset += values.len();
    }
    Ok(WindowSet {
        windows,
        w,
        d: 1,
        mode: WindowMode::Regular,
        provenance: "regular".into(),
    })
}

/// Counts windows by binary label: `(small, large)`.
pub fn partition_binary(ws: &WindowSet) -> (usize, usize) {
    let large = ws.windows.iter().filter(|w| w.is_large()).count();
    (ws.len() - large, large)
}

/// How the duplication count `R` translates into copies of each large window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DuplicationConvention {
    /// `R` additional copies: each large window appears `R + 1` times.
    #[default]
    AdditionalCopies,
    /// `R` is the total multiplicity (`R = 0` keeps the single original).
    TotalCount,
}

/// Minority-resampling configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleConfig {
    pub r: u32,
    #[serde(default)]
    pub convention: DuplicationConvention,
}

impl ResampleConfig {
    pub fn new(r: u32) -> Self {
        ResampleConfig {
            r,
            convention: DuplicationConvention::AdditionalCopies,
        }
    }

    fn extra_copies(&self) -> u32 {
        match self.convention {
            DuplicationConvention::AdditionalCopies => self.r,
            DuplicationConvention::TotalCount => self.r.saturating_sub(1),
        }
    }
}

/// Duplicates every large-label window so it appears `R + 1` times in total
/// (under the default convention), then shuffles deterministically by seed.
/// Small windows are untouched; `R = 0` returns the input unchanged.
/// Apply to training partitions only.
pub fn oversample_minority(train: &WindowSet, cfg: &ResampleConfig, seed: u64) -> WindowSet {
    let extra = cfg.extra_copies();
    if extra == 0 {
        return train.clone();
    }
    let mut windows = train.windows.clone();
    for window in &train.windows {
        if window.is_large() {
            for _ in 0..extra {
                windows.push(window.clone());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    windows.shuffle(&mut rng);
    train.like(windows)
}

/// Splits windows chronologically: the first `floor(train_fraction * n)` go
/// to the training set, the remainder to the test set. No shuffling.
pub fn chronological_split(ws: &WindowSet, train_fraction: f64) -> (WindowSet, WindowSet) {
    let n_train = ((ws.len() as f64) * train_fraction).floor() as usize;
    let n_train = n_train.min(ws.len());
    let train = ws.like(ws.windows[..n_train].to_vec());
    let test = ws.like(ws.windows[n_train..].to_vec());
    (train, test)
}

/// One expanding-train fold; indices are window positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train_start: usize,
    pub train_end: usize,
    pub test_start: usize,
    pub test_end: usize,
}

/// Walk-forward fold plan: fold `j` (1-based) trains on the first `j` blocks
/// and tests on block `j + 1`, where a block is `n / (k + 1)` windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub folds: Vec<Fold>,
}

/// Builds the expanding walk-forward plan. With `k = 4` every fold tests on
/// 20% of the windows and training always precedes testing.
pub fn walk_forward_folds(ws: &WindowSet, k: usize) -> Result<FoldPlan, WindowError> {
    if k < 2 {
        return Err(WindowError::NotEnoughWindows {
            needed: 2,
            got: k,
            what: "fold count",
        });
    }
    let unit = ws.len() / (k + 1);
    if unit == 0 {
        return Err(WindowError::NotEnoughWindows {
            needed: k + 1,
            got: ws.len(),
            what: "walk-forward folds",
        });
    }
    let folds = (1..=k)
        .map(|j| Fold {
            train_start: 0,
            train_end: j * unit,
            test_start: j * unit,
            test_end: (j + 1) * unit,
        })
        .collect();
    Ok(FoldPlan { k, folds })
}

/// Fits per-column min-max parameters over every feature entry of the set.
pub fn fit_feature_minmax(ws: &WindowSet) -> Result<Vec<MinMaxParams>, WindowError> {
    let names: &[&str] = match ws.mode {
        WindowMode::Irregular => &["flux", "waiting_time"],
        WindowMode::Regular => &["flux"],
    };
    let mut params = Vec::with_capacity(ws.d);
    for (col, name) in names.iter().enumerate().take(ws.d) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for window in &ws.windows {
            for row in 0..ws.w {
                let v = window.features[row * ws.d + col];
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if ws.is_empty() {
            return Err(WindowError::NotEnoughWindows {
                needed: 1,
                got: 0,
                what: "min-max fitting",
            });
        }
        params.push(MinMaxParams {
            feature: name.to_string(),
            observed_min: lo,
            observed_max: hi,
        });
    }
    Ok(params)
}

/// Applies per-column min-max scaling, returning a new set. Raw per-window
/// flux extrema are preserved for the statistics code.
pub fn apply_feature_minmax(
    ws: &WindowSet,
    params: &[MinMaxParams],
) -> Result<WindowSet, WindowError> {
    if params.len() != ws.d {
        return Err(WindowError::BadNormalization {
            expected: ws.d,
            got: params.len(),
        });
    }
    let windows = ws
        .windows
        .iter()
        .map(|window| {
            let mut scaled = window.clone();
            for row in 0..ws.w {
                for col in 0..ws.d {
                    let v = &mut scaled.features[row * ws.d + col];
                    *v = params[col].apply(*v);
                }
            }
            scaled
        })
        .collect();
    Ok(ws.like(windows))
}

/// Writes a window set in the auditable text format: per record the `w x d`
/// feature values, the ordinal label, and the anchor.
pub fn write_windows<W: Write>(ws: &WindowSet, mut out: W) -> Result<(), WindowError> {
    writeln!(
        out,
        "# flarecast windows v1 mode={} w={} d={} provenance={}",
        match ws.mode {
            WindowMode::Irregular => "irregular",
            WindowMode::Regular => "regular",
        },
        ws.w,
        ws.d,
        ws.provenance
    )?;
    writeln!(
        out,
        "# columns: f[0..w*d] class_ordinal anchor_time anchor_index min_flux max_flux"
    )?;
    for window in &ws.windows {
        for value in &window.features {
            write!(out, "{value:e} ")?;
        }
        writeln!(
            out,
            "{} {} {} {:e} {:e}",
            window.class.ordinal(),
            window.anchor_time.format("%Y-%m-%dT%H:%M:%SZ"),
            window.anchor_index,
            window.min_flux,
            window.max_flux
        )?;
    }
    Ok(())
}

/// Reads back the [`write_windows`] format.
pub fn read_windows<R: Read>(input: R) -> Result<WindowSet, WindowError> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| WindowError::Malformed("missing header".into()))??;
    let mut mode = WindowMode::Irregular;
    let mut w = 0usize;
    let mut d = 0usize;
    let mut provenance = String::new();
    for token in header.trim_start_matches('#').split_whitespace() {
        if let Some(value) = token.strip_prefix("mode=") {
            mode = match value {
                "irregular" => WindowMode::Irregular,
                "regular" => WindowMode::Regular,
                other => return Err(WindowError::Malformed(format!("unknown mode `{other}`"))),
            };
        } else if let Some(value) = token.strip_prefix("w=") {
            w = value.parse().map_err(|_| WindowError::Malformed("bad w".into()))?;
        } else if let Some(value) = token.strip_prefix("d=") {
            d = value.parse().map_err(|_| WindowError::Malformed("bad d".into()))?;
        } else if let Some(value) = token.strip_prefix("provenance=") {
            provenance = value.to_string();
        }
    }
    if w == 0 || d == 0 {
        return Err(WindowError::Malformed("header missing w= or d=".into()));
    }

    let mut windows = Vec::new();
    for (line_no, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| WindowError::Malformed(format!("line {}: {what}", line_no + 2));
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != w * d + 5 {
            return Err(bad("wrong field count"));
        }
        let mut features = Vec::with_capacity(w * d);
        for token in &tokens[..w * d] {
            features.push(token.parse().map_err(|_| bad("bad feature value"))?);
        }
        let ordinal: u8 = tokens[w * d].parse().map_err(|_| bad("bad class ordinal"))?;
        let class = FlareClass::from_ordinal(ordinal).ok_or_else(|| bad("class out of range"))?;
        let anchor_time = crate::catalog::parse_time(tokens[w * d + 1])
            .ok_or_else(|| bad("bad anchor time"))?;
        let anchor_index = tokens[w * d + 2].parse().map_err(|_| bad("bad anchor index"))?;
        let min_flux = tokens[w * d + 3].parse().map_err(|_| bad("bad min flux"))?;
        let max_flux = tokens[w * d + 4].parse().map_err(|_| bad("bad max flux"))?;
        windows.push(Window {
            features,
            class,
            anchor_index,
            anchor_time,
            min_flux,
            max_flux,
        });
    }
    Ok(WindowSet {
        windows,
        w,
        d,
        mode,
        provenance,
    })
}
