//! Central finite-difference verification of the analytic gradients.

use super::{bce_loss, bce_loss_grad, NetError, Network};

/// Outcome of a gradient check over every parameter coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Largest relative error between analytic and numeric gradients.
    pub max_rel_error: f64,
    /// Coordinates compared.
    pub checked: usize,
    /// Coordinates skipped because both gradients were indistinguishable from
    /// zero (no path to the loss, or a dead relu).
    pub skipped: usize,
}

/// Coordinates where both gradients are below this magnitude are skipped;
/// relative error is meaningless against finite-difference noise there.
const SKIP_THRESHOLD: f64 = 1e-6;

/// Compares every analytic parameter gradient of the BCE loss against the
/// central difference `(L(p + eps) - L(p - eps)) / (2 eps)`.
///
/// The model must be small: this costs two full forward passes per parameter
/// coordinate.
pub fn grad_check(
    net: &mut dyn Network,
    features: &[f64],
    seq_len: usize,
    label: f64,
    epsilon: f64,
) -> Result<GradCheckReport, NetError> {
    net.zero_grad();
    let prob = net.forward(features, seq_len)?;
    net.backward(bce_loss_grad(prob, label))?;
    let analytic: Vec<Vec<f64>> = net
        .parameters()
        .iter()
        .map(|p| p.grad.data().to_vec())
        .collect();

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };

    let param_count = analytic.len();
    for param_idx in 0..param_count {
        for coord in 0..analytic[param_idx].len() {
            let original = net.parameters()[param_idx].value.data()[coord];
            let loss_at = |net: &mut dyn Network, value: f64| -> Result<f64, NetError> {
                {
                    let mut params = net.parameters_mut();
                    params[param_idx].value.data_mut()[coord] = value;
                }
                Ok(bce_loss(net.infer(features, seq_len)?, label))
            };
            let loss_plus = loss_at(net, original + epsilon)?;
            let loss_minus = loss_at(net, original - epsilon)?;
            {
                let mut params = net.parameters_mut();
                params[param_idx].value.data_mut()[coord] = original;
            }

            let numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
            let a = analytic[param_idx][coord];
            let denom = a.abs().max(numeric.abs());
            if denom < SKIP_THRESHOLD {
                report.skipped += 1;
                continue;
            }
            report.checked += 1;
            report.max_rel_error = report.max_rel_error.max((a - numeric).abs() / denom);
        }
    }
    Ok(report)
}
