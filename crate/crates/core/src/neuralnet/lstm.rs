//! Single LSTM layer with full backpropagation through time.
//!
//! Gate order in the fused weight rows is `i, f, g, o` (input gate, forget
//! gate, cell candidate, output gate):
//!
//! ```text
//! z_t = W_ih x_t + W_hh h_{t-1} + b
//! i_t = s(z_i)   f_t = s(z_f)   g_t = tanh(z_g)   o_t = s(z_o)
//! c_t = f_t * c_{t-1} + i_t * g_t
//! h_t = o_t * tanh(c_t)
//! ```
//!
//! Initial hidden and cell states are zero; sequences are short enough that
//! BPTT runs untruncated over the whole window.

use rand_chacha::ChaCha8Rng;

use super::{sigmoid, NetError, Parameter};

pub struct LstmLayer {
    input_size: usize,
    hidden_size: usize,
    pub w_ih: Parameter,
    pub w_hh: Parameter,
    pub bias: Parameter,
    cache: Option<Cache>,
}

struct Cache {
    seq_len: usize,
    inputs: Vec<f64>,    // T x in
    gate_i: Vec<f64>,    // T x h, post-activation
    gate_f: Vec<f64>,
    gate_g: Vec<f64>,
    gate_o: Vec<f64>,
    cell: Vec<f64>,      // T x h
    tanh_cell: Vec<f64>, // T x h
    hidden: Vec<f64>,    // T x h
}

impl LstmLayer {
    pub fn new(prefix: &str, input_size: usize, hidden_size: usize, rng: &mut ChaCha8Rng) -> Self {
        let gates = 4 * hidden_size;
        let mut w_ih = Parameter::zeros(&format!("{prefix}.w_ih"), &[gates, input_size]);
        let mut w_hh = Parameter::zeros(&format!("{prefix}.w_hh"), &[gates, hidden_size]);
        w_ih.init_uniform(input_size, rng);
        w_hh.init_uniform(hidden_size, rng);
        let mut bias = Parameter::zeros(&format!("{prefix}.bias"), &[gates]);
        // forget gate starts open so the cell retains early inputs
        bias.value.data_mut()[hidden_size..2 * hidden_size].fill(1.0);
        LstmLayer {
            input_size,
            hidden_size,
            w_ih,
            w_hh,
            bias,
            cache: None,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    /// Sequence length of the cached forward pass, if one is pending.
    pub fn cached_seq_len(&self) -> Option<usize> {
        self.cache.as_ref().map(|c| c.seq_len)
    }

    fn check_input(&self, input: &[f64], seq_len: usize) -> Result<(), NetError> {
        if input.len() != seq_len * self.input_size {
            return Err(NetError::ShapeMismatch(format!(
                "lstm expects {} x {} inputs, got {} values",
                seq_len,
                self.input_size,
                input.len()
            )));
        }
        Ok(())
    }

    /// Runs the recurrence, returning all `seq_len x hidden` states and
    /// caching the intermediates for `backward`.
    pub fn forward(&mut self, input: &[f64], seq_len: usize) -> Result<Vec<f64>, NetError> {
        self.check_input(input, seq_len)?;
        let h = self.hidden_size;
        let mut cache = Cache {
            seq_len,
            inputs: input.to_vec(),
            gate_i: vec![0.0; seq_len * h],
            gate_f: vec![0.0; seq_len * h],
            gate_g: vec![0.0; seq_len * h],
            gate_o: vec![0.0; seq_len * h],
            cell: vec![0.0; seq_len * h],
            tanh_cell: vec![0.0; seq_len * h],
            hidden: vec![0.0; seq_len * h],
        };
        self.run(input, seq_len, Some(&mut cache));
        let hidden = cache.hidden.clone();
        self.cache = Some(cache);
        Ok(hidden)
    }

    /// Cache-free forward pass; same values as `forward`.
    pub fn infer(&self, input: &[f64], seq_len: usize) -> Result<Vec<f64>, NetError> {
        self.check_input(input, seq_len)?;
        Ok(self.run(input, seq_len, None))
    }

    /// Shared recurrence. Returns the hidden sequence; fills `cache` when given.
    fn run(&self, input: &[f64], seq_len: usize, mut cache: Option<&mut Cache>) -> Vec<f64> {
        let h = self.hidden_size;
        let d = self.input_size;
        let w_ih = self.w_ih.value.data();
        let w_hh = self.w_hh.value.data();
        let bias = self.bias.value.data();

        let mut hidden_seq = vec![0.0; seq_len * h];
        let mut h_prev = vec![0.0; h];
        let mut c_prev = vec![0.0; h];
        let mut gates = vec![0.0; 4 * h];

        for t in 0..seq_len {
            let x_t = &input[t * d..(t + 1) * d];
            for (row, gate) in gates.iter_mut().enumerate() {
                let mut z = bias[row];
                let w_row = &w_ih[row * d..(row + 1) * d];
                for k in 0..d {
                    z += w_row[k] * x_t[k];
                }
                let u_row = &w_hh[row * h..(row + 1) * h];
                for k in 0..h {
                    z += u_row[k] * h_prev[k];
                }
                *gate = z;
            }
            for j in 0..h {
                let i_t = sigmoid(gates[j]);
                let f_t = sigmoid(gates[h + j]);
                let g_t = gates[2 * h + j].tanh();
                let o_t = sigmoid(gates[3 * h + j]);
                let c_t = f_t * c_prev[j] + i_t * g_t;
                let tanh_c = c_t.tanh();
                let h_t = o_t * tanh_c;
                hidden_seq[t * h + j] = h_t;
                if let Some(cache) = cache.as_deref_mut() {
                    cache.gate_i[t * h + j] = i_t;
                    cache.gate_f[t * h + j] = f_t;
                    cache.gate_g[t * h + j] = g_t;
                    cache.gate_o[t * h + j] = o_t;
                    cache.cell[t * h + j] = c_t;
                    cache.tanh_cell[t * h + j] = tanh_c;
                }
                h_prev[j] = h_t;
                c_prev[j] = c_t;
            }
        }
        if let Some(cache) = cache {
            cache.hidden.copy_from_slice(&hidden_seq);
        }
        hidden_seq
    }

    /// BPTT over the cached forward pass. `grad_hidden` is the loss gradient
    /// on every hidden state (`seq_len x hidden`); returns the gradient on the
    /// inputs and accumulates parameter gradients.
    pub fn backward(&mut self, grad_hidden: &[f64]) -> Result<Vec<f64>, NetError> {
        let cache = self.cache.take().ok_or(NetError::BackwardWithoutForward)?;
        let h = self.hidden_size;
        let d = self.input_size;
        let seq_len = cache.seq_len;
        if grad_hidden.len() != seq_len * h {
            return Err(NetError::ShapeMismatch(format!(
                "lstm backward expects {} x {} gradients, got {}",
                seq_len,
                h,
                grad_hidden.len()
            )));
        }

        let w_ih = self.w_ih.value.data().to_vec();
        let w_hh = self.w_hh.value.data().to_vec();
        let grad_w_ih = self.w_ih.grad.data_mut();
        let mut grad_w_hh_acc = vec![0.0; 4 * h * h];
        let mut grad_bias_acc = vec![0.0; 4 * h];

        let mut grad_input = vec![0.0; seq_len * d];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut d_gates = vec![0.0; 4 * h];
        let zeros = vec![0.0; h];

        for t in (0..seq_len).rev() {
            let at = |v: &Vec<f64>, j: usize| v[t * h + j];
            for j in 0..h {
                let dh = grad_hidden[t * h + j] + dh_next[j];
                let o_t = at(&cache.gate_o, j);
                let tanh_c = at(&cache.tanh_cell, j);
                let dc = dh * o_t * (1.0 - tanh_c * tanh_c) + dc_next[j];

                let i_t = at(&cache.gate_i, j);
                let f_t = at(&cache.gate_f, j);
                let g_t = at(&cache.gate_g, j);
                let c_prev = if t > 0 { cache.cell[(t - 1) * h + j] } else { 0.0 };

                d_gates[j] = dc * g_t * i_t * (1.0 - i_t);
                d_gates[h + j] = dc * c_prev * f_t * (1.0 - f_t);
                d_gates[2 * h + j] = dc * i_t * (1.0 - g_t * g_t);
                d_gates[3 * h + j] = dh * tanh_c * o_t * (1.0 - o_t);

                dc_next[j] = dc * f_t;
            }

            let x_t = &cache.inputs[t * d..(t + 1) * d];
            let h_prev: &[f64] = if t > 0 {
                &cache.hidden[(t - 1) * h..t * h]
            } else {
                &zeros
            };

            for row in 0..4 * h {
                let dg = d_gates[row];
                grad_bias_acc[row] += dg;
                let w_row = &mut grad_w_ih[row * d..(row + 1) * d];
                for k in 0..d {
                    w_row[k] += dg * x_t[k];
                }
                let u_row = &mut grad_w_hh_acc[row * h..(row + 1) * h];
                for k in 0..h {
                    u_row[k] += dg * h_prev[k];
                }
            }

            // dh_next = W_hh^T d_gates, dx = W_ih^T d_gates
            for k in 0..h {
                let mut acc = 0.0;
                for row in 0..4 * h {
                    acc += w_hh[row * h + k] * d_gates[row];
                }
                dh_next[k] = acc;
            }
            let dx = &mut grad_input[t * d..(t + 1) * d];
            for k in 0..d {
                let mut acc = 0.0;
                for row in 0..4 * h {
                    acc += w_ih[row * d + k] * d_gates[row];
                }
                dx[k] += acc;
            }
        }

        for (dst, src) in self.w_hh.grad.data_mut().iter_mut().zip(&grad_w_hh_acc) {
            *dst += src;
        }
        for (dst, src) in self.bias.grad.data_mut().iter_mut().zip(&grad_bias_acc) {
            *dst += src;
        }
        Ok(grad_input)
    }

    pub fn zero_grad(&mut self) {
        self.w_ih.zero_grad();
        self.w_hh.zero_grad();
        self.bias.zero_grad();
    }

    pub fn parameters(&self) -> Vec<&Parameter> {
        vec![&self.w_ih, &self.w_hh, &self.bias]
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        vec![&mut self.w_ih, &mut self.w_hh, &mut self.bias]
    }
}
