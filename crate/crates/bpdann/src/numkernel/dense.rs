//! Fully connected layer with hand-derived gradients.

use rand::Rng;

use super::activation::Activation;
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// `y = activation(x * W^T + b)`, weights stored `(out x in)`, one sample per row.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub weights: Matrix,
    /// `1 x out` row vector.
    pub bias: Matrix,
    pub activation: Activation,
}

/// Gradients mirroring the layer's parameter shapes, plus the gradient
/// flowing back into the layer input.
#[derive(Debug, Clone)]
pub struct DenseGradients {
    pub weights: Matrix,
    pub bias: Matrix,
    pub input: Matrix,
}

impl DenseLayer {
    /// Fresh layer with uniform init in `[-s, s]`, `s = sqrt(6 / (fan_in + fan_out))`.
    pub fn new<R: Rng>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        Self {
            weights: Matrix::uniform(out_dim, in_dim, limit, rng),
            bias: Matrix::zeros(1, out_dim),
            activation,
        }
    }

    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(out_dim, in_dim),
            bias: Matrix::zeros(1, out_dim),
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    /// Forward pass over a batch (`input` rows are samples).
    pub fn forward(&self, input: &Matrix) -> Result<Matrix> {
        if input.cols() != self.in_dim() {
            return Err(Error::Dimension(format!(
                "dense input width {} != layer in-dim {}",
                input.cols(),
                self.in_dim()
            )));
        }
        let mut z = input.matmul_transpose_b(&self.weights);
        z.add_row_broadcast(&self.bias);
        Ok(self.activation.apply(&z))
    }

    /// Chain-rule gradients from the cached forward pass.
    ///
    /// `input` and `output` must be the exact matrices of the forward call;
    /// `upstream` is dL/d(output).
    pub fn backward(
        &self,
        input: &Matrix,
        output: &Matrix,
        upstream: &Matrix,
    ) -> Result<DenseGradients> {
        if !upstream.same_shape(output) {
            return Err(Error::Dimension(format!(
                "upstream shape {:?} != output shape {:?}",
                upstream.shape(),
                output.shape()
            )));
        }
        if input.rows() != output.rows() || input.cols() != self.in_dim() || output.cols() != self.out_dim() {
            return Err(Error::State(
                "cached forward does not match layer shapes".into(),
            ));
        }
        let dz = self.activation.backprop(output, upstream);
        // dW = dz^T * x, db = column sums of dz, dx = dz * W
        let weights = dz.matmul_transpose_a(input);
        let mut bias = Matrix::zeros(1, self.out_dim());
        for r in 0..dz.rows() {
            for (b, &g) in bias.row_mut(0).iter_mut().zip(dz.row(r)) {
                *b += g;
            }
        }
        let input_grad = dz.matmul(&self.weights);
        Ok(DenseGradients {
            weights,
            bias,
            input: input_grad,
        })
    }
}
