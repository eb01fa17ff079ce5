//! Forecast verification: confusion matrices, skill scores, ROC/AUC, and
//! aggregation of repeated runs.
//!
//! The positive class is always the large flares (M, X). Metrics with a zero
//! denominator are reported as undefined rather than silently zeroed. The
//! negative class size is named `neg` throughout to avoid a collision with
//! series lengths.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty input")]
    EmptyInput,
    #[error("labels and scores differ in length: {labels} vs {scores}")]
    LengthMismatch { labels: usize, scores: usize },
    #[error("ROC needs at least one positive and one negative label")]
    SingleClass,
    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),
    #[error("no runs to aggregate")]
    NoRuns,
}

/// Binary confusion counts; positive = large flare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionMatrix {
    pub fn new(true_pos: u64, false_neg: u64, true_neg: u64, false_pos: u64) -> Self {
        ConfusionMatrix {
            true_pos,
            false_pos,
            true_neg,
            false_neg,
        }
    }

    /// Positive class size `P = TP + FN`.
    pub fn p(&self) -> u64 {
        self.true_pos + self.false_neg
    }

    /// Negative class size `Neg = FP + TN`.
    pub fn neg(&self) -> u64 {
        self.false_pos + self.true_neg
    }

    pub fn total(&self) -> u64 {
        self.p() + self.neg()
    }
}

/// Thresholds predictions at `threshold` (`p >= threshold` is positive) and
/// counts against the labels. `true` labels are the positive class.
pub fn confusion(
    labels: &[bool],
    probabilities: &[f64],
    threshold: f64,
) -> Result<ConfusionMatrix, EvalError> {
    if labels.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if labels.len() != probabilities.len() {
        return Err(EvalError::LengthMismatch {
            labels: labels.len(),
            scores: probabilities.len(),
        });
    }
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (&label, &p) in labels.iter().zip(probabilities) {
        let predicted_positive = p >= threshold;
        match (label, predicted_positive) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_neg += 1,
            (false, true) => cm.false_pos += 1,
            (false, false) => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

/// Confusion-derived metrics; `None` marks an undefined (0/0) value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricBundle {
    pub accuracy: Option<f64>,
    /// Positive predictive value for large flares: TP / (TP + FP).
    pub precision_large: Option<f64>,
    /// Sensitivity / recall for large flares: TP / P.
    pub recall_large: Option<f64>,
    /// Negative predictive value: TN / (TN + FN).
    pub precision_small: Option<f64>,
    /// Recall of the small class; equals specificity.
    pub recall_small: Option<f64>,
    pub specificity: Option<f64>,
    pub apss: Option<f64>,
    pub hss: Option<f64>,
    pub tss: Option<f64>,
}

/// Computes the full score table from a confusion matrix.
pub fn skill_scores(cm: &ConfusionMatrix) -> MetricBundle {
    let (tp, fp, tn, fn_) = (
        cm.true_pos as f64,
        cm.false_pos as f64,
        cm.true_neg as f64,
        cm.false_neg as f64,
    );
    let p = tp + fn_;
    let neg = fp + tn;
    let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);

    let recall_large = ratio(tp, p);
    let specificity = ratio(tn, neg);
    let apss = if p < neg {
        ratio(tp - fp, p)
    } else {
        ratio(tn - fn_, neg)
    };
    let hss = ratio(
        2.0 * (tp * tn - fn_ * fp),
        p * (tn + fn_) + (tp + fp) * neg,
    );
    let tss = match (recall_large, specificity) {
        (Some(r), Some(s)) => Some(r + s - 1.0),
        _ => None,
    };

    MetricBundle {
        accuracy: ratio(tp + tn, p + neg),
        precision_large: ratio(tp, tp + fp),
        recall_large,
        precision_small: ratio(tn, tn + fn_),
        recall_small: specificity,
        specificity,
        apss,
        hss,
        tss,
    }
}

/// Closed form for the HSS of a classifier with 75% sensitivity and 75%
/// specificity as a function of the class ratio `r = P / Neg`:
/// `4r / ((r + 3)^2 - 8)`. Cross-checks `skill_scores` and quantifies how the
/// HSS collapses under imbalance while the TSS stays at 0.5.
pub fn hss_imbalance_curve(ratio: f64) -> f64 {
    4.0 * ratio / ((ratio + 3.0).powi(2) - 8.0)
}

/// One point of the ROC curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve over every distinct score threshold plus the endpoints, and the
/// trapezoidal AUC. Tied scores advance both rates at once, which makes the
/// AUC equal to the rank-averaged Mann-Whitney pair statistic.
pub fn roc_auc(labels: &[bool], scores: &[f64]) -> Result<(Vec<RocPoint>, f64), EvalError> {
    if labels.len() != scores.len() {
        return Err(EvalError::LengthMismatch {
            labels: labels.len(),
            scores: scores.len(),
        });
    }
    if let Some(idx) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore(idx));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut idx = 0;
    while idx < order.len() {
        // consume the whole tie group before emitting a point
        let score = scores[order[idx]];
        while idx < order.len() && scores[order[idx]] == score {
            if labels[order[idx]] {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
    }

    let mut auc = 0.0;
    for pair in points.windows(2) {
        auc += (pair[1].fpr - pair[0].fpr) * (pair[0].tpr + pair[1].tpr) / 2.0;
    }
    Ok((points, auc))
}

/// Metrics of one evaluation run: the score table plus its AUC.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMetrics {
    pub scores: MetricBundle,
    pub auc: Option<f64>,
}

/// A metric aggregated over repeated runs: mean and population standard
/// deviation, or undefined with the offending run indices listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum AggregateMetric {
    Defined { mean: f64, std: f64 },
    Undefined { runs: Vec<usize> },
}

impl AggregateMetric {
    pub fn mean(&self) -> Option<f64> {
        match self {
            AggregateMetric::Defined { mean, .. } => Some(*mean),
            AggregateMetric::Undefined { .. } => None,
        }
    }

    pub fn std(&self) -> Option<f64> {
        match self {
            AggregateMetric::Defined { std, .. } => Some(*std),
            AggregateMetric::Undefined { .. } => None,
        }
    }
}

fn aggregate_one(values: Vec<Option<f64>>) -> AggregateMetric {
    let undefined: Vec<usize> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.is_none().then_some(i))
        .collect();
    if !undefined.is_empty() {
        return AggregateMetric::Undefined { runs: undefined };
    }
    let xs: Vec<f64> = values.into_iter().flatten().collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    AggregateMetric::Defined {
        mean,
        std: variance.sqrt(),
    }
}

/// Per-metric aggregation over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedMetrics {
    pub accuracy: AggregateMetric,
    pub precision_large: AggregateMetric,
    pub recall_large: AggregateMetric,
    pub precision_small: AggregateMetric,
    pub recall_small: AggregateMetric,
    pub specificity: AggregateMetric,
    pub apss: AggregateMetric,
    pub hss: AggregateMetric,
    pub tss: AggregateMetric,
    pub auc: AggregateMetric,
}

/// Aggregates one or more runs into mean +/- population std per metric.
/// A metric undefined in any run is aggregated as undefined.
pub fn aggregate_runs(runs: &[RunMetrics]) -> Result<AggregatedMetrics, EvalError> {
    if runs.is_empty() {
        return Err(EvalError::NoRuns);
    }
    let collect = |f: &dyn Fn(&RunMetrics) -> Option<f64>| {
        aggregate_one(runs.iter().map(f).collect())
    };
    Ok(AggregatedMetrics {
        accuracy: collect(&|r| r.scores.accuracy),
        precision_large: collect(&|r| r.scores.precision_large),
        recall_large: collect(&|r| r.scores.recall_large),
        precision_small: collect(&|r| r.scores.precision_small),
        recall_small: collect(&|r| r.scores.recall_small),
        specificity: collect(&|r| r.scores.specificity),
        apss: collect(&|r| r.scores.apss),
        hss: collect(&|r| r.scores.hss),
        tss: collect(&|r| r.scores.tss),
        auc: collect(&|r| r.auc),
    })
}

/// Full evaluation report for one experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillReport {
    pub mode: String,
    pub r: u32,
    pub seeds: Vec<u64>,
    pub metrics: AggregatedMetrics,
    /// ROC points of the first seed's run, for plotting.
    pub roc: Vec<RocPoint>,
}
