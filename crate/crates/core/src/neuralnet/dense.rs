//! Fully connected layer (applied timestep-wise over sequences) and a
//! parameter-free elementwise activation layer.

use rand_chacha::ChaCha8Rng;

use super::{Activation, NetError, Parameter};

pub struct DenseLayer {
    input_size: usize,
    output_size: usize,
    activation: Activation,
    pub weight: Parameter,
    pub bias: Parameter,
    cache: Option<DenseCache>,
}

struct DenseCache {
    seq_len: usize,
    inputs: Vec<f64>,  // T x in
    outputs: Vec<f64>, // T x out, post-activation
}

impl DenseLayer {
    pub fn new(
        prefix: &str,
        input_size: usize,
        output_size: usize,
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut weight = Parameter::zeros(&format!("{prefix}.weight"), &[output_size, input_size]);
        weight.init_uniform(input_size, rng);
        let bias = Parameter::zeros(&format!("{prefix}.bias"), &[output_size]);
        DenseLayer {
            input_size,
            output_size,
            activation,
            weight,
            bias,
            cache: None,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    fn check_input(&self, input: &[f64], seq_len: usize) -> Result<(), NetError> {
        if input.len() != seq_len * self.input_size {
            return Err(NetError::ShapeMismatch(format!(
                "dense expects {} x {} inputs, got {} values",
                seq_len,
                self.input_size,
                input.len()
            )));
        }
        Ok(())
    }

    fn run(&self, input: &[f64], seq_len: usize) -> Vec<f64> {
        let (n_in, n_out) = (self.input_size, self.output_size);
        let w = self.weight.value.data();
        let b = self.bias.value.data();
        let mut out = vec![0.0; seq_len * n_out];
        for t in 0..seq_len {
            let x = &input[t * n_in..(t + 1) * n_in];
            let y = &mut out[t * n_out..(t + 1) * n_out];
            for (row, y_v) in y.iter_mut().enumerate() {
                let mut acc = b[row];
                let w_row = &w[row * n_in..(row + 1) * n_in];
                for k in 0..n_in {
                    acc += w_row[k] * x[k];
                }
                *y_v = self.activation.value(acc);
            }
        }
        out
    }

    /// Applies the layer to each of the `seq_len` rows, caching for backward.
    pub fn forward(&mut self, input: &[f64], seq_len: usize) -> Result<Vec<f64>, NetError> {
        self.check_input(input, seq_len)?;
        let outputs = self.run(input, seq_len);
        self.cache = Some(DenseCache {
            seq_len,
            inputs: input.to_vec(),
            outputs: outputs.clone(),
        });
        Ok(outputs)
    }

    /// Cache-free forward pass.
    pub fn infer(&self, input: &[f64], seq_len: usize) -> Result<Vec<f64>, NetError> {
        self.check_input(input, seq_len)?;
        Ok(self.run(input, seq_len))
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, grad_output: &[f64]) -> Result<Vec<f64>, NetError> {
        let cache = self.cache.take().ok_or(NetError::BackwardWithoutForward)?;
        let (n_in, n_out) = (self.input_size, self.output_size);
        if grad_output.len() != cache.seq_len * n_out {
            return Err(NetError::ShapeMismatch(format!(
                "dense backward expects {} x {} gradients, got {}",
                cache.seq_len,
                n_out,
                grad_output.len()
            )));
        }
        let w = self.weight.value.data().to_vec();
        let grad_w = self.weight.grad.data_mut();
        let mut grad_b = vec![0.0; n_out];
        let mut grad_input = vec![0.0; cache.seq_len * n_in];

        for t in 0..cache.seq_len {
            let x = &cache.inputs[t * n_in..(t + 1) * n_in];
            let y = &cache.outputs[t * n_out..(t + 1) * n_out];
            let dy = &grad_output[t * n_out..(t + 1) * n_out];
            let dx = &mut grad_input[t * n_in..(t + 1) * n_in];
            for row in 0..n_out {
                let dz = dy[row] * self.activation.deriv_from_output(y[row]);
                grad_b[row] += dz;
                let w_row = &w[row * n_in..(row + 1) * n_in];
                let gw_row = &mut grad_w[row * n_in..(row + 1) * n_in];
                for k in 0..n_in {
                    gw_row[k] += dz * x[k];
                    dx[k] += dz * w_row[k];
                }
            }
        }
        for (dst, src) in self.bias.grad.data_mut().iter_mut().zip(&grad_b) {
            *dst += src;
        }
        Ok(grad_input)
    }

    pub fn zero_grad(&mut self) {
        self.weight.zero_grad();
        self.bias.zero_grad();
    }

    pub fn parameters(&self) -> Vec<&Parameter> {
        vec![&self.weight, &self.bias]
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        vec![&mut self.weight, &mut self.bias]
    }
}

/// Elementwise activation applied between layers; no parameters.
pub struct ActivationLayer {
    activation: Activation,
    cache: Option<Vec<f64>>,
}

impl ActivationLayer {
    pub fn new(activation: Activation) -> Self {
        ActivationLayer {
            activation,
            cache: None,
        }
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn forward(&mut self, input: &[f64]) -> Vec<f64> {
        let out: Vec<f64> = input.iter().map(|&x| self.activation.value(x)).collect();
        self.cache = Some(out.clone());
        out
    }

    pub fn infer(&self, input: &[f64]) -> Vec<f64> {
        input.iter().map(|&x| self.activation.value(x)).collect()
    }

    pub fn backward(&mut self, grad_output: &[f64]) -> Result<Vec<f64>, NetError> {
        let outputs = self.cache.take().ok_or(NetError::BackwardWithoutForward)?;
        if outputs.len() != grad_output.len() {
            return Err(NetError::ShapeMismatch(format!(
                "activation backward expects {} gradients, got {}",
                outputs.len(),
                grad_output.len()
            )));
        }
        Ok(outputs
            .iter()
            .zip(grad_output)
            .map(|(&y, &dy)| dy * self.activation.deriv_from_output(y))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn dense_applies_rows_independently() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut layer = DenseLayer::new("d", 2, 1, Activation::Identity, &mut rng);
        layer.weight.value.data_mut().copy_from_slice(&[2.0, -1.0]);
        layer.bias.value.data_mut().copy_from_slice(&[0.5]);
        let out = layer.forward(&[1.0, 1.0, 3.0, 0.0], 2).unwrap();
        assert_eq!(out, vec![1.5, 6.5]);
    }

    #[test]
    fn zero_initialized_head_outputs_half_after_sigmoid() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut layer = DenseLayer::new("d", 3, 1, Activation::Sigmoid, &mut rng);
        layer.weight.value.data_mut().fill(0.0);
        let out = layer.forward(&[0.7, -0.3, 2.0], 1).unwrap();
        assert_eq!(out, vec![0.5]);
    }

    #[test]
    fn dense_gradient_matches_hand_derivation() {
        // identity activation, single row: dL/dw = dy * x, dL/dx = dy * w
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut layer = DenseLayer::new("d", 2, 1, Activation::Identity, &mut rng);
        layer.weight.value.data_mut().copy_from_slice(&[3.0, -2.0]);
        layer.forward(&[0.5, 4.0], 1).unwrap();
        let dx = layer.backward(&[2.0]).unwrap();
        assert_eq!(layer.weight.grad.data(), &[1.0, 8.0]);
        assert_eq!(layer.bias.grad.data(), &[2.0]);
        assert_eq!(dx, vec![6.0, -4.0]);
    }

    #[test]
    fn activation_layer_round_trip() {
        let mut layer = ActivationLayer::new(Activation::Relu);
        let out = layer.forward(&[-1.0, 2.0]);
        assert_eq!(out, vec![0.0, 2.0]);
        let dx = layer.backward(&[5.0, 5.0]).unwrap();
        assert_eq!(dx, vec![0.0, 5.0]);
        assert!(matches!(
            layer.backward(&[1.0, 1.0]),
            Err(NetError::BackwardWithoutForward)
        ));
    }
}
