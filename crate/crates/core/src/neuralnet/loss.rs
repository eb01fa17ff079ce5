//! Binary cross-entropy on probabilities, with epsilon clamping so a
//! saturated sigmoid cannot produce infinities.

/// Probabilities are clamped to `[BCE_EPSILON, 1 - BCE_EPSILON]` before the logs.
pub const BCE_EPSILON: f64 = 1e-12;

fn clamp(p: f64) -> f64 {
    p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON)
}

/// `-[y ln p + (1 - y) ln(1 - p)]` for a single prediction.
pub fn bce_loss(p: f64, y: f64) -> f64 {
    let p = clamp(p);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// `d(loss)/dp = (p - y) / (p (1 - p))` at the clamped probability.
pub fn bce_loss_grad(p: f64, y: f64) -> f64 {
    let p = clamp(p);
    (p - y) / (p * (1.0 - p))
}
