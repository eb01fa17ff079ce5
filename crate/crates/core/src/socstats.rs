//! Self-organized-criticality statistics: the bounded power-law density,
//! maximum-likelihood index fitting, Kolmogorov-Smirnov threshold selection,
//! an inverse-CDF sampler, and window-extrema distributions.
//!
//! The tail model is `p(f) = ((alpha - 1) / f_th) (f / f_th)^(-alpha)` for
//! `f >= f_th`, `alpha > 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::windows::WindowSet;

/// Smallest tail accepted by the threshold scan.
pub const MIN_TAIL: usize = 50;

/// Largest number of candidate thresholds evaluated by the scan.
pub const MAX_CANDIDATES: usize = 200;

#[derive(Debug, Error)]
pub enum SocError {
    #[error("power-law index must exceed 1, got {0}")]
    NonNormalizable(f64),
    #[error("flux {f:e} below threshold {f_th:e}")]
    BelowThreshold { f: f64, f_th: f64 },
    #[error("tail holds {got} samples, need at least {needed}")]
    TailTooSmall { got: usize, needed: usize },
    #[error("degenerate tail: all samples equal the threshold")]
    DegenerateTail,
    #[error("no candidate threshold leaves a tail of at least {0} samples")]
    NoViableThreshold(usize),
    #[error("need at least {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },
    #[error("samples must be positive and finite")]
    InvalidSamples,
}

/// A fitted power-law tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub f_th: f64,
    /// Sup-norm gap between the empirical tail CDF and the fitted CDF.
    pub ks_distance: f64,
    /// Number of samples at or above the threshold.
    pub n_tail: usize,
}

/// Normalized tail density at `f`.
pub fn power_law_pdf(f: f64, alpha: f64, f_th: f64) -> Result<f64, SocError> {
    if alpha <= 1.0 {
        return Err(SocError::NonNormalizable(alpha));
    }
    if f < f_th {
        return Err(SocError::BelowThreshold { f, f_th });
    }
    Ok((alpha - 1.0) / f_th * (f / f_th).powf(-alpha))
}

/// CDF of the tail model: `1 - (f / f_th)^(1 - alpha)`.
pub fn power_law_cdf(f: f64, alpha: f64, f_th: f64) -> f64 {
    1.0 - (f / f_th).powf(1.0 - alpha)
}

/// Closed-form continuous MLE over the tail `f >= f_th`:
/// `alpha = 1 + n / sum(ln(f_i / f_th))`.
pub fn fit_alpha_mle(samples: &[f64], f_th: f64) -> Result<f64, SocError> {
    let mut n = 0usize;
    let mut strictly_above = 0usize;
    let mut log_sum = 0.0;
    for &f in samples {
        if !(f.is_finite() && f > 0.0) {
            return Err(SocError::InvalidSamples);
        }
        if f >= f_th {
            n += 1;
            log_sum += (f / f_th).ln();
            if f > f_th {
                strictly_above += 1;
            }
        }
    }
    if strictly_above < 2 {
        return Err(SocError::TailTooSmall {
            got: strictly_above,
            needed: 2,
        });
    }
    if log_sum <= 0.0 {
        return Err(SocError::DegenerateTail);
    }
    Ok(1.0 + n as f64 / log_sum)
}

/// KS distance between the sorted tail and the fitted model CDF.
fn ks_distance_sorted(tail: &[f64], alpha: f64, f_th: f64) -> f64 {
    let n = tail.len() as f64;
    let mut d = 0.0f64;
    for (i, &f) in tail.iter().enumerate() {
        let model = power_law_cdf(f, alpha, f_th);
        let below = i as f64 / n;
        let above = (i + 1) as f64 / n;
        d = d.max((model - below).abs()).max((above - model).abs());
    }
    d
}

/// Scans candidate thresholds (subsampled from the sorted unique sample
/// values), fits the index by MLE on each tail, and returns the fit with the
/// smallest KS distance. Tails smaller than [`MIN_TAIL`] are not considered;
/// ties resolve to the lowest threshold.
pub fn select_threshold_ks(samples: &[f64]) -> Result<PowerLawFit, SocError> {
    if samples.len() < MIN_TAIL {
        return Err(SocError::NotEnoughSamples {
            needed: MIN_TAIL,
            got: samples.len(),
        });
    }
    if samples.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(SocError::InvalidSamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut unique = sorted.clone();
    unique.dedup();
    let candidates: Vec<f64> = if unique.len() <= MAX_CANDIDATES {
        unique
    } else {
        let stride = (unique.len() - 1) as f64 / (MAX_CANDIDATES - 1) as f64;
        (0..MAX_CANDIDATES)
            .map(|i| unique[(i as f64 * stride).round() as usize])
            .collect()
    };

    let mut best: Option<PowerLawFit> = None;
    for &f_th in &candidates {
        let tail_start = sorted.partition_point(|&f| f < f_th);
        let tail = &sorted[tail_start..];
        if tail.len() < MIN_TAIL {
            continue;
        }
        let alpha = match fit_alpha_mle(tail, f_th) {
            Ok(a) => a,
            Err(_) => continue,
        };
        let ks = ks_distance_sorted(tail, alpha, f_th);
        let better = match &best {
            None => true,
            Some(b) => ks < b.ks_distance,
        };
        if better {
            best = Some(PowerLawFit {
                alpha,
                f_th,
                ks_distance: ks,
                n_tail: tail.len(),
            });
        }
    }
    best.ok_or(SocError::NoViableThreshold(MIN_TAIL))
}

/// Inverse-CDF sampler for the tail model: `f = f_th (1 - u)^(-1/(alpha-1))`
/// with `u` uniform in `[0, 1)`.
pub fn sample_power_law<R: Rng>(rng: &mut R, alpha: f64, f_th: f64, n: usize) -> Vec<f64> {
    assert!(alpha > 1.0, "power-law index must exceed 1");
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen::<f64>();
            f_th * (1.0 - u).powf(-1.0 / (alpha - 1.0))
        })
        .collect()
}

/// Log-binned empirical PDF: bin centers (geometric) against densities
/// normalized by the linear bin width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramPdf {
    /// `(bin_center, density)` pairs; empty bins are omitted.
    pub bins: Vec<(f64, f64)>,
}

/// Builds a log-binned density histogram over positive values.
pub fn log_histogram_pdf(values: &[f64], n_bins: usize) -> Result<HistogramPdf, SocError> {
    if values.is_empty() || n_bins == 0 {
        return Err(SocError::NotEnoughSamples {
            needed: 1,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(SocError::InvalidSamples);
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        // single occupied bin covering the point
        return Ok(HistogramPdf {
            bins: vec![(lo, f64::INFINITY)],
        });
    }
    let (log_lo, log_hi) = (lo.ln(), hi.ln());
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let pos = (v.ln() - log_lo) / (log_hi - log_lo) * n_bins as f64;
        let idx = (pos.floor() as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let total = values.len() as f64;
    let bins = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| {
            let left = (log_lo + (log_hi - log_lo) * i as f64 / n_bins as f64).exp();
            let right = (log_lo + (log_hi - log_lo) * (i + 1) as f64 / n_bins as f64).exp();
            let center = (left * right).sqrt();
            let density = c as f64 / (total * (right - left));
            (center, density)
        })
        .collect();
    Ok(HistogramPdf { bins })
}

/// A fit attempt whose failure is data, not a crash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FitOutcome {
    Fit(PowerLawFit),
    Error { message: String },
}

impl FitOutcome {
    pub fn as_fit(&self) -> Option<&PowerLawFit> {
        match self {
            FitOutcome::Fit(f) => Some(f),
            FitOutcome::Error { .. } => None,
        }
    }
}

/// Distributions of the per-window minimum and maximum raw fluxes, with
/// power-law fits from the KS threshold scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowExtremaReport {
    pub min_histogram: HistogramPdf,
    pub max_histogram: HistogramPdf,
    pub min_fit: FitOutcome,
    pub max_fit: FitOutcome,
}

/// Computes per-window flux extrema distributions over a window set that
/// still carries raw (unnormalized) fluxes.
pub fn window_extrema_pdfs(ws: &WindowSet, n_bins: usize) -> Result<WindowExtremaReport, SocError> {
    if ws.is_empty() {
        return Err(SocError::NotEnoughSamples { needed: 1, got: 0 });
    }
    let mins: Vec<f64> = ws.windows.iter().map(|w| w.min_flux).collect();
    let maxs: Vec<f64> = ws.windows.iter().map(|w| w.max_flux).collect();
    let fit = |values: &[f64]| match select_threshold_ks(values) {
        Ok(f) => FitOutcome::Fit(f),
        Err(e) => FitOutcome::Error {
            message: e.to_string(),
        },
    };
    Ok(WindowExtremaReport {
        min_histogram: log_histogram_pdf(&mins, n_bins)?,
        max_histogram: log_histogram_pdf(&maxs, n_bins)?,
        min_fit: fit(&mins),
        max_fit: fit(&maxs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng as _;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pdf_at_threshold_and_hand_value() {
        let f_th = 3.0e-7;
        let alpha = 2.5;
        let at_threshold = power_law_pdf(f_th, alpha, f_th).unwrap();
        assert!((at_threshold - (alpha - 1.0) / f_th).abs() < 1e-6);
        // alpha = 2 at f = 2 f_th: p = 1 / (4 f_th)
        let p = power_law_pdf(2.0 * f_th, 2.0, f_th).unwrap();
        assert!((p - 1.0 / (4.0 * f_th)).abs() < 1e-9 / f_th);
    }

    #[test]
    fn pdf_rejects_bad_arguments() {
        assert!(matches!(
            power_law_pdf(1.0, 1.0, 0.5),
            Err(SocError::NonNormalizable(_))
        ));
        assert!(matches!(
            power_law_pdf(0.1, 2.0, 0.5),
            Err(SocError::BelowThreshold { .. })
        ));
    }

    #[test]
    fn pdf_integrates_to_one() {
        // trapezoidal quadrature in log space out to a far cutoff
        for &(alpha, f_th) in &[(1.89f64, 5.63e-6f64), (3.27, 7.76e-7)] {
            let steps = 400_000;
            let log_lo = f_th.ln();
            let log_hi = (f_th * 1e12).ln();
            let mut integral = 0.0;
            let mut previous: Option<(f64, f64)> = None;
            for i in 0..=steps {
                // clamp away exp/ln rounding at the lower endpoint
                let f = (log_lo + (log_hi - log_lo) * i as f64 / steps as f64)
                    .exp()
                    .max(f_th);
                let p = power_law_pdf(f, alpha, f_th).unwrap();
                if let Some((f0, p0)) = previous {
                    integral += (f - f0) * (p + p0) / 2.0;
                }
                previous = Some((f, p));
            }
            // remaining mass beyond the cutoff, analytic
            let tail = (1e12f64).powf(1.0 - alpha);
            assert!(
                (integral + tail - 1.0).abs() < 1e-6,
                "alpha={alpha}: {integral} + {tail}"
            );
        }
    }

    #[test]
    fn mle_closed_form_hand_example() {
        let alpha = fit_alpha_mle(&[2.0, 4.0, 8.0], 1.0).unwrap();
        let expected = 1.0 + 3.0 / (6.0 * std::f64::consts::LN_2);
        assert!((alpha - expected).abs() < 1e-12);
        assert!((alpha - 1.72135).abs() < 1e-5);
    }

    #[test]
    fn mle_needs_a_real_tail() {
        assert!(matches!(
            fit_alpha_mle(&[0.5, 0.9], 1.0),
            Err(SocError::TailTooSmall { .. })
        ));
        assert!(matches!(
            fit_alpha_mle(&[1.0, 1.0, 1.0], 1.0),
            Err(SocError::TailTooSmall { .. })
        ));
    }

    #[test]
    fn sampler_inverse_cdf_points() {
        // u = 0 maps to f_th exactly; the median for alpha = 2 is 2 f_th.
        let f_th = 4.2e-6;
        let f0 = f_th * (1.0f64 - 0.0).powf(-1.0);
        assert_eq!(f0, f_th);
        let median = f_th * (1.0f64 - 0.5).powf(-1.0 / (2.0 - 1.0));
        assert!((median - 2.0 * f_th).abs() < 1e-18);
    }

    #[test]
    fn sampler_matches_analytic_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (alpha, f_th) = (2.3, 1e-6);
        let mut samples = sample_power_law(&mut rng, alpha, f_th, 100_000);
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_distance_sorted(&samples, alpha, f_th);
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn mle_recovers_generator_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(alpha, f_th) in &[(3.27, 7.76e-7), (1.89, 5.63e-6)] {
            let samples = sample_power_law(&mut rng, alpha, f_th, 100_000);
            let fitted = fit_alpha_mle(&samples, f_th).unwrap();
            assert!(
                (fitted - alpha).abs() < 0.05,
                "alpha {alpha}: fitted {fitted}"
            );
        }
    }

    #[test]
    fn threshold_scan_recovers_a_pure_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (alpha, f_th) = (2.5, 1e-6);
        let samples = sample_power_law(&mut rng, alpha, f_th, 100_000);
        let fit = select_threshold_ks(&samples).unwrap();
        assert!((fit.alpha - alpha).abs() < 0.1, "alpha {}", fit.alpha);
        assert!(
            fit.f_th >= f_th / 10.0 && fit.f_th <= f_th * 10.0,
            "f_th {:e}",
            fit.f_th
        );
        assert!(fit.n_tail >= MIN_TAIL);
    }

    #[test]
    fn threshold_scan_skips_a_lognormal_bulk() {
        // lognormal bulk below the splice, power-law tail above it
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let splice = 1e-6;
        let mut samples = Vec::new();
        for _ in 0..20_000 {
            // lognormal with median splice/10 and sigma 0.5: mass above the
            // splice is ~2e-6, negligible
            let z: f64 = randn(&mut rng);
            samples.push(splice / 10.0 * (0.5 * z).exp());
        }
        samples.extend(sample_power_law(&mut rng, 2.5, splice, 10_000));
        let fit = select_threshold_ks(&samples).unwrap();
        assert!(
            fit.f_th >= 0.8 * splice,
            "threshold {:e} fell into the bulk",
            fit.f_th
        );
        assert!((fit.alpha - 2.5).abs() < 0.15, "alpha {}", fit.alpha);
    }

    fn randn(rng: &mut ChaCha8Rng) -> f64 {
        // Box-Muller
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn scan_requires_minimum_sample_count() {
        assert!(matches!(
            select_threshold_ks(&[1.0; 49]),
            Err(SocError::NotEnoughSamples { .. })
        ));
    }

    #[test]
    fn scan_result_is_the_argmin_over_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let samples = sample_power_law(&mut rng, 2.0, 1.0, 5_000);
        let fit = select_threshold_ks(&samples).unwrap();
        // re-evaluate a few candidate thresholds by hand
        let mut sorted = samples.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for idx in [0usize, 100, 500, 2000, 4000] {
            let f_th = sorted[idx];
            let tail = &sorted[idx..];
            if tail.len() < MIN_TAIL {
                continue;
            }
            if let Ok(alpha) = fit_alpha_mle(tail, f_th) {
                let d = ks_distance_sorted(tail, alpha, f_th);
                assert!(fit.ks_distance <= d + 1e-12);
            }
        }
    }

    #[test]
    fn histogram_handles_degenerate_data() {
        let h = log_histogram_pdf(&[2.0; 100], 20).unwrap();
        assert_eq!(h.bins.len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn mle_is_scale_equivariant(
            seed in any::<u64>(),
            scale in 1e-8f64..1e8,
            alpha in 1.5f64..4.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples = sample_power_law(&mut rng, alpha, 1.0, 500);
            let base = fit_alpha_mle(&samples, 1.0).unwrap();
            let scaled: Vec<f64> = samples.iter().map(|s| s * scale).collect();
            let rescaled = fit_alpha_mle(&scaled, scale).unwrap();
            prop_assert!((base - rescaled).abs() < 1e-9 * base.abs());
        }
    }

    #[test]
    fn sample_fit_round_trip_is_within_asymptotic_bound() {
        // |alpha_hat - alpha| <= 3 (alpha - 1) / sqrt(n) at n = 1e5
        for (i, &alpha) in [1.5, 2.0, 3.0, 4.0].iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
            let n = 100_000;
            let samples = sample_power_law(&mut rng, alpha, 1.0, n);
            let fitted = fit_alpha_mle(&samples, 1.0).unwrap();
            let bound = 3.0 * (alpha - 1.0) / (n as f64).sqrt();
            assert!(
                (fitted - alpha).abs() <= bound,
                "alpha {alpha}: {fitted} off by more than {bound}"
            );
        }
    }
}
