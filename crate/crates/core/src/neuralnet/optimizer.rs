//! Parameter update rules: plain SGD and the adaptive-moment method.

use serde::{Deserialize, Serialize};

use super::{NetError, Parameter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

/// Stateful optimizer over a fixed parameter list. Updates are deterministic
/// given the sequence of gradients; non-finite gradients abort the step.
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step_count: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Optimizer {
            kind,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    /// Applies one update over all parameters, in order. The parameter list
    /// must be the same (count and shapes) on every call.
    pub fn step(&mut self, params: &mut [&mut Parameter]) -> Result<(), NetError> {
        // reject non-finite gradients before touching any value
        for p in params.iter() {
            let mut max_abs = 0.0f64;
            for &g in p.grad.data() {
                if !g.is_finite() {
                    return Err(NetError::NonFiniteGradient {
                        param: p.name.clone(),
                        max_abs,
                    });
                }
                max_abs = max_abs.max(g.abs());
            }
        }

        match self.kind {
            OptimizerKind::Sgd => {
                for p in params.iter_mut() {
                    let grads = p.grad.data().to_vec();
                    for (v, g) in p.value.data_mut().iter_mut().zip(grads) {
                        *v -= self.learning_rate * g;
                    }
                }
            }
            OptimizerKind::Adam => {
                if self.first_moment.is_empty() {
                    self.first_moment = params.iter().map(|p| vec![0.0; p.grad.numel()]).collect();
                    self.second_moment = self.first_moment.clone();
                }
                if self.first_moment.len() != params.len() {
                    return Err(NetError::InvalidConfig(
                        "optimizer state does not match parameter count".into(),
                    ));
                }
                self.step_count += 1;
                let t = self.step_count as i32;
                let bias1 = 1.0 - self.beta1.powi(t);
                let bias2 = 1.0 - self.beta2.powi(t);
                for (idx, p) in params.iter_mut().enumerate() {
                    let grads = p.grad.data().to_vec();
                    let m = &mut self.first_moment[idx];
                    let v = &mut self.second_moment[idx];
                    for (k, (value, g)) in p.value.data_mut().iter_mut().zip(grads).enumerate() {
                        m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g;
                        v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g * g;
                        let m_hat = m[k] / bias1;
                        let v_hat = v[k] / bias2;
                        *value -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(values: &[f64], grads: &[f64]) -> Parameter {
        let mut p = Parameter::zeros("p", &[values.len()]);
        p.value.data_mut().copy_from_slice(values);
        p.grad.data_mut().copy_from_slice(grads);
        p
    }

    #[test]
    fn sgd_step_is_value_minus_lr_times_grad() {
        let mut p = param(&[1.0], &[2.0]);
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1);
        opt.step(&mut [&mut p]).unwrap();
        assert!((p.value.data()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_leaves_sgd_parameters_unchanged() {
        let mut p = param(&[3.5, -2.0], &[0.0, 0.0]);
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.5);
        opt.step(&mut [&mut p]).unwrap();
        assert_eq!(p.value.data(), &[3.5, -2.0]);
    }

    #[test]
    fn adam_first_step_is_lr_bounded() {
        // With constant gradient g, the first step is lr * g / (|g| + eps),
        // i.e. close to lr * sign(g).
        let g = 7.3;
        let lr = 1e-3;
        let mut p = param(&[0.0], &[g]);
        let mut opt = Optimizer::new(OptimizerKind::Adam, lr);
        opt.step(&mut [&mut p]).unwrap();
        let expected = -lr * g / (g.abs() + 1e-8);
        assert!((p.value.data()[0] - expected).abs() < 1e-12);
        assert!(p.value.data()[0].abs() <= lr);
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let mut p = param(&[0.0], &[f64::NAN]);
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1);
        assert!(matches!(
            opt.step(&mut [&mut p]),
            Err(NetError::NonFiniteGradient { .. })
        ));
        // value untouched on abort
        assert_eq!(p.value.data(), &[0.0]);
    }
}
