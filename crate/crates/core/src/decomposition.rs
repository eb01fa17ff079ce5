//! Trend/seasonal decomposition via centered moving average with
//! edge-replication padding.
//!
//! The trend is an average-pool over a window of odd length `kernel` centered
//! on each element, with the first and last elements replicated
//! `(kernel - 1) / 2` times so the output keeps the input length. The
//! seasonal component is the exact remainder, so `trend + seasonal`
//! reconstructs the input up to float rounding.

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecompositionError {
    #[error("kernel must be odd, got {0}")]
    EvenKernel(usize),
    #[error("kernel {kernel} exceeds series length {len}")]
    KernelTooLong { kernel: usize, len: usize },
    #[error("kernel must be >= 1")]
    ZeroKernel,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A series split into trend and seasonal parts; `trend + seasonal == original`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedSeries {
    pub original: Vec<f64>,
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub kernel: usize,
}

/// Second-pass output: the seasonal component smoothed again, and the
/// residual noise that makes `trend + smoothed_seasonal + noise` exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondPass {
    pub smoothed_seasonal: Vec<f64>,
    pub noise: Vec<f64>,
    pub kernel: usize,
}

fn check_kernel(kernel: usize, len: usize) -> Result<(), DecompositionError> {
    if kernel == 0 {
        return Err(DecompositionError::ZeroKernel);
    }
    if kernel % 2 == 0 {
        return Err(DecompositionError::EvenKernel(kernel));
    }
    if kernel > len {
        return Err(DecompositionError::KernelTooLong { kernel, len });
    }
    Ok(())
}

/// Centered moving average with edge replication, preserving length.
/// `kernel` must be odd and no longer than the series.
pub fn moving_average(values: &[f64], kernel: usize) -> Result<Vec<f64>, DecompositionError> {
    check_kernel(kernel, values.len())?;
    let half = kernel / 2;
    let n = values.len();
    // Prefix sums over the padded series; padding replicates the edges.
    let padded_at = |i: isize| -> f64 {
        let idx = i.clamp(0, n as isize - 1) as usize;
        values[idx]
    };
    let mut out = Vec::with_capacity(n);
    let mut window_sum: f64 = (-(half as isize)..=half as isize).map(padded_at).sum();
    out.push(window_sum / kernel as f64);
    for i in 1..n {
        window_sum += padded_at(i as isize + half as isize);
        window_sum -= padded_at(i as isize - 1 - half as isize);
        out.push(window_sum / kernel as f64);
    }
    Ok(out)
}

/// Splits a series into trend (moving average) and seasonal (exact remainder).
pub fn decompose(values: &[f64], kernel: usize) -> Result<DecomposedSeries, DecompositionError> {
    let trend = moving_average(values, kernel)?;
    let seasonal = values.iter().zip(&trend).map(|(x, t)| x - t).collect();
    Ok(DecomposedSeries {
        original: values.to_vec(),
        trend,
        seasonal,
        kernel,
    })
}

/// Smooths the seasonal component once more and surfaces the residual noise.
/// `trend + smoothed_seasonal + noise` reconstructs the original exactly.
pub fn second_pass_noise(
    decomposed: &DecomposedSeries,
    kernel: usize,
) -> Result<SecondPass, DecompositionError> {
    let smoothed_seasonal = moving_average(&decomposed.seasonal, kernel)?;
    let noise = decomposed
        .seasonal
        .iter()
        .zip(&smoothed_seasonal)
        .map(|(s, sm)| s - sm)
        .collect();
    Ok(SecondPass {
        smoothed_seasonal,
        noise,
        kernel,
    })
}

/// Dumps the decomposition as four-column text (`x trend seasonal noise`) for
/// plotting. The noise column comes from a second pass with the same kernel.
pub fn write_decomposition<W: Write>(
    decomposed: &DecomposedSeries,
    second: &SecondPass,
    mut out: W,
) -> Result<(), DecompositionError> {
    writeln!(
        out,
        "# flarecast decomposition v1 kernel={} second_kernel={}",
        decomposed.kernel, second.kernel
    )?;
    writeln!(out, "# columns: x trend seasonal noise")?;
    for i in 0..decomposed.original.len() {
        writeln!(
            out,
            "{:e} {:e} {:e} {:e}",
            decomposed.original[i], decomposed.trend[i], decomposed.seasonal[i], second.noise[i]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn variance(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
    }

    #[test]
    fn hand_checked_moving_average() {
        // Edge replication: [0,0,0,1,2,3,4,4,4] windows of 3.
        let d = decompose(&[0.0, 1.0, 2.0, 3.0, 4.0], 3).unwrap();
        let expected = [1.0 / 3.0, 1.0, 2.0, 3.0, 11.0 / 3.0];
        for (t, e) in d.trend.iter().zip(expected) {
            assert!((t - e).abs() < 1e-12, "trend {t} vs {e}");
        }
        for i in 0..5 {
            assert!((d.seasonal[i] - (i as f64 - d.trend[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_series_has_zero_seasonal() {
        let d = decompose(&[7.5; 40], 9).unwrap();
        assert!(d.trend.iter().all(|&t| (t - 7.5).abs() < 1e-12));
        assert!(d.seasonal.iter().all(|&s| s.abs() < 1e-12));
    }

    #[test]
    fn kernel_one_is_identity() {
        let x = [3.0, -1.0, 4.0, 1.0, -5.0];
        let d = decompose(&x, 1).unwrap();
        assert_eq!(d.trend, x.to_vec());
        assert!(d.seasonal.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn invalid_kernels_are_rejected() {
        assert!(matches!(decompose(&[1.0; 10], 4), Err(DecompositionError::EvenKernel(4))));
        assert!(matches!(
            decompose(&[1.0; 3], 5),
            Err(DecompositionError::KernelTooLong { .. })
        ));
        assert!(matches!(decompose(&[1.0; 3], 0), Err(DecompositionError::ZeroKernel)));
    }

    #[test]
    fn second_pass_kernel_one_has_zero_noise() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let d = decompose(&x, 5).unwrap();
        let second = second_pass_noise(&d, 1).unwrap();
        assert!(second.noise.iter().all(|&n| n.abs() < 1e-15));
    }

    #[test]
    fn second_pass_reconstructs_exactly() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.31).sin() + 0.01 * i as f64).collect();
        let d = decompose(&x, 7).unwrap();
        let second = second_pass_noise(&d, 5).unwrap();
        for i in 0..x.len() {
            let rebuilt = d.trend[i] + second.smoothed_seasonal[i] + second.noise[i];
            assert!((rebuilt - x[i]).abs() < 1e-12 * x[i].abs().max(1.0));
        }
    }

    #[test]
    fn white_noise_ends_up_in_the_residual() {
        // For white noise with large kernels the trend and smoothed seasonal
        // absorb little variance; the residual keeps most of it.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..4000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = decompose(&x, 25).unwrap();
        let second = second_pass_noise(&d, 25).unwrap();
        let ratio = variance(&second.noise) / variance(&x);
        assert!((ratio - 1.0).abs() < 0.15, "variance ratio {ratio}");
    }

    #[test]
    fn recovers_a_planted_sinusoid() {
        // linear trend + sinusoid + small noise: the smoothed seasonal should
        // track the sinusoid closely.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 600;
        let sinusoid: Vec<f64> = (0..n).map(|i| (i as f64 * 0.4).sin()).collect();
        let x: Vec<f64> = (0..n)
            .map(|i| 0.01 * i as f64 + sinusoid[i] + rng.gen_range(-0.05..0.05))
            .collect();
        let d = decompose(&x, 99).unwrap();
        let second = second_pass_noise(&d, 3).unwrap();

        let mean_a = second.smoothed_seasonal.iter().sum::<f64>() / n as f64;
        let mean_b = sinusoid.iter().sum::<f64>() / n as f64;
        let mut cov = 0.0;
        let mut var_a = 0.0;
        let mut var_b = 0.0;
        for i in 0..n {
            let da = second.smoothed_seasonal[i] - mean_a;
            let db = sinusoid[i] - mean_b;
            cov += da * db;
            var_a += da * da;
            var_b += db * db;
        }
        let correlation = cov / (var_a.sqrt() * var_b.sqrt());
        assert!(correlation > 0.9, "correlation {correlation}");
    }

    fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1e6f64..1e6, 1..200)
    }

    fn kernel_for(len: usize, pick: usize) -> usize {
        let max_half = (len - 1) / 2;
        1 + 2 * (pick % (max_half + 1))
    }

    proptest! {
        #[test]
        fn reconstruction_is_exact(x in series_strategy(), pick in 0usize..50) {
            let kernel = kernel_for(x.len(), pick);
            let d = decompose(&x, kernel).unwrap();
            let max_abs = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let bound = 8.0 * f64::EPSILON * max_abs;
            for i in 0..x.len() {
                prop_assert!((x[i] - (d.trend[i] + d.seasonal[i])).abs() <= bound);
            }
        }

        #[test]
        fn smoothing_never_raises_variance(x in series_strategy(), pick in 1usize..50) {
            if x.len() >= 3 {
                let kernel = kernel_for(x.len(), pick).max(3).min(x.len() - (1 - x.len() % 2));
                if kernel % 2 == 1 && kernel <= x.len() {
                    let d = decompose(&x, kernel).unwrap();
                    prop_assert!(variance(&d.trend) <= variance(&x) + 1e-9 * variance(&x).max(1.0));
                }
            }
        }

        #[test]
        fn shift_equivariance_in_the_interior(x in proptest::collection::vec(-1e3f64..1e3, 30..120), pick in 0usize..8) {
            let kernel = kernel_for(10, pick); // at most 9
            let shifted: Vec<f64> = x[5..].to_vec();
            let full = decompose(&x, kernel).unwrap();
            let part = decompose(&shifted, kernel).unwrap();
            let half = kernel / 2;
            // interior indices of the shifted series unaffected by padding
            for i in half..shifted.len() - half {
                prop_assert!((part.trend[i] - full.trend[i + 5]).abs() < 1e-9);
            }
        }

        #[test]
        fn trend_is_linear(
            x in proptest::collection::vec(-1e3f64..1e3, 10..60),
            y_seed in any::<u64>(),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            pick in 0usize..20,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(y_seed);
            let y: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1e3..1e3)).collect();
            let kernel = kernel_for(x.len(), pick);
            let combined: Vec<f64> = x.iter().zip(&y).map(|(xv, yv)| a * xv + b * yv).collect();
            let dx = decompose(&x, kernel).unwrap();
            let dy = decompose(&y, kernel).unwrap();
            let dc = decompose(&combined, kernel).unwrap();
            for i in 0..x.len() {
                let expected = a * dx.trend[i] + b * dy.trend[i];
                prop_assert!((dc.trend[i] - expected).abs() < 1e-6);
            }
        }
    }
}
