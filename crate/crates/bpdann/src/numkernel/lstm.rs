//! LSTM layer with hand-derived backpropagation through time.
//!
//! One sequence at a time: the forward pass consumes a `T x input` matrix
//! with zero-initialized states and returns the final hidden state as the
//! sequence embedding. The cached per-timestep activations drive the
//! backward pass.

use rand::Rng;

use super::activation::sigmoid;
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Gate parameters: each weight is `hidden x (input + hidden)` applied to
/// the concatenation `[x_t, h_prev]`, each bias `1 x hidden`.
#[derive(Debug, Clone)]
pub struct LstmLayer {
    pub w_input: Matrix,
    pub w_forget: Matrix,
    pub w_output: Matrix,
    pub w_cell: Matrix,
    pub b_input: Matrix,
    pub b_forget: Matrix,
    pub b_output: Matrix,
    pub b_cell: Matrix,
    input_size: usize,
    hidden_size: usize,
}

/// Per-timestep activations kept for BPTT.
#[derive(Debug, Clone)]
struct StepCache {
    /// `[x_t, h_prev]`, `1 x (input + hidden)`.
    z: Matrix,
    gate_input: Matrix,
    gate_forget: Matrix,
    gate_output: Matrix,
    gate_cell: Matrix,
    cell_prev: Matrix,
    cell_tanh: Matrix,
}

#[derive(Debug, Clone)]
pub struct LstmCache {
    steps: Vec<StepCache>,
    final_hidden: Matrix,
}

impl LstmCache {
    pub fn final_hidden(&self) -> &Matrix {
        &self.final_hidden
    }

    pub fn timesteps(&self) -> usize {
        self.steps.len()
    }
}

/// BPTT gradients for all gate parameters plus the input sequence.
#[derive(Debug, Clone)]
pub struct LstmGradients {
    pub w_input: Matrix,
    pub w_forget: Matrix,
    pub w_output: Matrix,
    pub w_cell: Matrix,
    pub b_input: Matrix,
    pub b_forget: Matrix,
    pub b_output: Matrix,
    pub b_cell: Matrix,
    pub input: Matrix,
}

impl LstmLayer {
    pub fn new<R: Rng>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let fan_in = input_size + hidden_size;
        let limit = (6.0 / (fan_in + hidden_size) as f64).sqrt();
        let w = |rng: &mut R| Matrix::uniform(hidden_size, fan_in, limit, rng);
        let b = || Matrix::zeros(1, hidden_size);
        Self {
            w_input: w(rng),
            w_forget: w(rng),
            w_output: w(rng),
            w_cell: w(rng),
            b_input: b(),
            b_forget: b(),
            b_output: b(),
            b_cell: b(),
            input_size,
            hidden_size,
        }
    }

    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        let fan_in = input_size + hidden_size;
        let w = || Matrix::zeros(hidden_size, fan_in);
        let b = || Matrix::zeros(1, hidden_size);
        Self {
            w_input: w(),
            w_forget: w(),
            w_output: w(),
            w_cell: w(),
            b_input: b(),
            b_forget: b(),
            b_output: b(),
            b_cell: b(),
            input_size,
            hidden_size,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    /// Runs the recurrence and returns the final hidden state (`1 x hidden`).
    pub fn forward(&self, sequence: &Matrix) -> Result<Matrix> {
        Ok(self.forward_cached(sequence)?.final_hidden.clone())
    }

    /// Forward pass that also returns the cache needed by [`Self::backward`].
    pub fn forward_cached(&self, sequence: &Matrix) -> Result<LstmCache> {
        if sequence.rows() == 0 {
            return Err(Error::Input("empty sequence".into()));
        }
        if sequence.cols() != self.input_size {
            return Err(Error::Dimension(format!(
                "sequence width {} != lstm input size {}",
                sequence.cols(),
                self.input_size
            )));
        }
        let hidden = self.hidden_size;
        let mut h = Matrix::zeros(1, hidden);
        let mut c = Matrix::zeros(1, hidden);
        let mut steps = Vec::with_capacity(sequence.rows());
        for t in 0..sequence.rows() {
            let mut z = Matrix::zeros(1, self.input_size + hidden);
            z.row_mut(0)[..self.input_size].copy_from_slice(sequence.row(t));
            z.row_mut(0)[self.input_size..].copy_from_slice(h.row(0));

            let gate = |w: &Matrix, b: &Matrix| {
                let mut pre = z.matmul_transpose_b(w);
                pre.add_row_broadcast(b);
                pre
            };
            let gate_input = gate(&self.w_input, &self.b_input).map(sigmoid);
            let gate_forget = gate(&self.w_forget, &self.b_forget).map(sigmoid);
            let gate_output = gate(&self.w_output, &self.b_output).map(sigmoid);
            let gate_cell = gate(&self.w_cell, &self.b_cell).map(f64::tanh);

            let cell_prev = c.clone();
            c = gate_forget.hadamard(&cell_prev);
            c.add_assign(&gate_input.hadamard(&gate_cell));
            let cell_tanh = c.map(f64::tanh);
            h = gate_output.hadamard(&cell_tanh);

            steps.push(StepCache {
                z,
                gate_input,
                gate_forget,
                gate_output,
                gate_cell,
                cell_prev,
                cell_tanh,
            });
        }
        Ok(LstmCache {
            steps,
            final_hidden: h,
        })
    }

    /// BPTT from an upstream gradient on the final hidden state.
    pub fn backward(
        &self,
        sequence: &Matrix,
        cache: &LstmCache,
        upstream: &Matrix,
    ) -> Result<LstmGradients> {
        if cache.steps.len() != sequence.rows() {
            return Err(Error::State(format!(
                "cache covers {} timesteps, sequence has {}",
                cache.steps.len(),
                sequence.rows()
            )));
        }
        if upstream.shape() != (1, self.hidden_size) {
            return Err(Error::Dimension(format!(
                "upstream shape {:?} != (1, {})",
                upstream.shape(),
                self.hidden_size
            )));
        }
        let fan_in = self.input_size + self.hidden_size;
        let mut grads = LstmGradients {
            w_input: Matrix::zeros(self.hidden_size, fan_in),
            w_forget: Matrix::zeros(self.hidden_size, fan_in),
            w_output: Matrix::zeros(self.hidden_size, fan_in),
            w_cell: Matrix::zeros(self.hidden_size, fan_in),
            b_input: Matrix::zeros(1, self.hidden_size),
            b_forget: Matrix::zeros(1, self.hidden_size),
            b_output: Matrix::zeros(1, self.hidden_size),
            b_cell: Matrix::zeros(1, self.hidden_size),
            input: Matrix::zeros(sequence.rows(), self.input_size),
        };

        let mut dh = upstream.clone();
        let mut dc = Matrix::zeros(1, self.hidden_size);
        for t in (0..cache.steps.len()).rev() {
            let st = &cache.steps[t];

            // h = o * tanh(c)
            let d_output = dh.hadamard(&st.cell_tanh);
            let mut dz_output = d_output;
            for (g, &o) in dz_output.data_mut().iter_mut().zip(st.gate_output.data()) {
                *g *= o * (1.0 - o);
            }
            // hidden path into the cell state
            for k in 0..self.hidden_size {
                let o = st.gate_output.data()[k];
                let tc = st.cell_tanh.data()[k];
                dc.data_mut()[k] += dh.data()[k] * o * (1.0 - tc * tc);
            }

            // c = f * c_prev + i * g
            let d_input_gate = dc.hadamard(&st.gate_cell);
            let mut dz_input = d_input_gate;
            for (g, &i) in dz_input.data_mut().iter_mut().zip(st.gate_input.data()) {
                *g *= i * (1.0 - i);
            }
            let d_forget = dc.hadamard(&st.cell_prev);
            let mut dz_forget = d_forget;
            for (g, &f) in dz_forget.data_mut().iter_mut().zip(st.gate_forget.data()) {
                *g *= f * (1.0 - f);
            }
            let d_cell = dc.hadamard(&st.gate_input);
            let mut dz_cell = d_cell;
            for (g, &gc) in dz_cell.data_mut().iter_mut().zip(st.gate_cell.data()) {
                *g *= 1.0 - gc * gc;
            }

            grads.w_input.add_assign(&dz_input.matmul_transpose_a(&st.z));
            grads.w_forget.add_assign(&dz_forget.matmul_transpose_a(&st.z));
            grads.w_output.add_assign(&dz_output.matmul_transpose_a(&st.z));
            grads.w_cell.add_assign(&dz_cell.matmul_transpose_a(&st.z));
            grads.b_input.add_assign(&dz_input);
            grads.b_forget.add_assign(&dz_forget);
            grads.b_output.add_assign(&dz_output);
            grads.b_cell.add_assign(&dz_cell);

            let mut dz_cat = dz_input.matmul(&self.w_input);
            dz_cat.add_assign(&dz_forget.matmul(&self.w_forget));
            dz_cat.add_assign(&dz_output.matmul(&self.w_output));
            dz_cat.add_assign(&dz_cell.matmul(&self.w_cell));

            grads
                .input
                .row_mut(t)
                .copy_from_slice(&dz_cat.row(0)[..self.input_size]);
            let mut dh_prev = Matrix::zeros(1, self.hidden_size);
            dh_prev
                .row_mut(0)
                .copy_from_slice(&dz_cat.row(0)[self.input_size..]);
            dh = dh_prev;
            dc = dc.hadamard(&st.gate_forget);
        }
        Ok(grads)
    }
}
