//! Element-wise activations and their derivatives.

use super::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Tanh,
    /// Row-wise softmax; intended only as the final classifier activation.
    Softmax,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    /// Applies the activation to a pre-activation matrix (row = sample).
    pub fn apply(&self, z: &Matrix) -> Matrix {
        match self {
            Activation::Identity => z.clone(),
            Activation::Relu => z.map(|v| v.max(0.0)),
            Activation::Sigmoid => z.map(sigmoid),
            Activation::Tanh => z.map(f64::tanh),
            Activation::Softmax => {
                let mut out = z.clone();
                for r in 0..out.rows() {
                    let row = out.row_mut(r);
                    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let mut sum = 0.0;
                    for v in row.iter_mut() {
                        *v = (*v - max).exp();
                        sum += *v;
                    }
                    for v in row.iter_mut() {
                        *v /= sum;
                    }
                }
                out
            }
        }
    }

    /// dL/dz given dL/dy and the cached post-activation output y.
    ///
    /// All supported activations admit a derivative in terms of the output,
    /// which saves caching pre-activations. Softmax needs the full row
    /// Jacobian `y_i (delta_ij - y_j)`.
    pub fn backprop(&self, output: &Matrix, upstream: &Matrix) -> Matrix {
        match self {
            Activation::Identity => upstream.clone(),
            Activation::Relu => {
                let mut out = upstream.clone();
                for (g, &y) in out.data_mut().iter_mut().zip(output.data()) {
                    if y <= 0.0 {
                        *g = 0.0;
                    }
                }
                out
            }
            Activation::Sigmoid => {
                let mut out = upstream.clone();
                for (g, &y) in out.data_mut().iter_mut().zip(output.data()) {
                    *g *= y * (1.0 - y);
                }
                out
            }
            Activation::Tanh => {
                let mut out = upstream.clone();
                for (g, &y) in out.data_mut().iter_mut().zip(output.data()) {
                    *g *= 1.0 - y * y;
                }
                out
            }
            Activation::Softmax => {
                let mut out = Matrix::zeros(upstream.rows(), upstream.cols());
                for r in 0..upstream.rows() {
                    let y = output.row(r);
                    let up = upstream.row(r);
                    let dot: f64 = y.iter().zip(up).map(|(&yi, &ui)| yi * ui).sum();
                    for (j, g) in out.row_mut(r).iter_mut().enumerate() {
                        *g = y[j] * (up[j] - dot);
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_of_zero_is_half() {
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn sigmoid_stable_at_extremes() {
        assert!(sigmoid(-745.0).is_finite());
        assert!((sigmoid(50.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let z = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, -50.0, 0.0, 50.0]).unwrap();
        let y = Activation::Softmax.apply(&z);
        for r in 0..2 {
            let s: f64 = y.row(r).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let z = Matrix::zeros(1, 2);
        let y = Activation::Softmax.apply(&z);
        assert_eq!(y.data(), &[0.5, 0.5]);
    }
}
