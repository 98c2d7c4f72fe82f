//! Inverted dropout.

use rand::Rng;

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy)]
pub struct DropoutSpec {
    rate: f64,
}

/// Element multipliers applied during the forward pass; reused by the
/// backward pass so gradients flow only through survivors.
#[derive(Debug, Clone)]
pub struct DropoutMask {
    factors: Option<Matrix>,
}

impl DropoutMask {
    pub fn identity() -> Self {
        Self { factors: None }
    }

    pub fn backward(&self, upstream: &Matrix) -> Matrix {
        match &self.factors {
            None => upstream.clone(),
            Some(f) => upstream.hadamard(f),
        }
    }
}

impl DropoutSpec {
    pub fn new(rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Config(format!("dropout rate {rate} not in [0, 1)")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Train mode zeroes each element with probability `rate` and scales
    /// survivors by `1 / (1 - rate)`; eval mode is the identity.
    pub fn apply<R: Rng>(&self, input: &Matrix, mode: Mode, rng: &mut R) -> (Matrix, DropoutMask) {
        if mode == Mode::Eval || self.rate == 0.0 {
            return (input.clone(), DropoutMask::identity());
        }
        let keep_scale = 1.0 / (1.0 - self.rate);
        let mut factors = Matrix::zeros(input.rows(), input.cols());
        for v in factors.data_mut() {
            if rng.gen::<f64>() >= self.rate {
                *v = keep_scale;
            }
        }
        let out = input.hadamard(&factors);
        (out, DropoutMask { factors: Some(factors) })
    }
}

/// Gradient reversal: the forward pass is the identity, so only the
/// backward map exists as an operation. Returns `-lambda * upstream`.
pub fn grad_reverse(upstream: &Matrix, lambda: f64) -> Matrix {
    upstream.scale(-lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rate_one_is_rejected() {
        assert!(DropoutSpec::new(1.0).is_err());
        assert!(DropoutSpec::new(-0.1).is_err());
    }

    #[test]
    fn eval_mode_is_bit_identical_to_identity() {
        let spec = DropoutSpec::new(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let input = Matrix::uniform(7, 5, 3.0, &mut rng);
        let (out, mask) = spec.apply(&input, Mode::Eval, &mut rng);
        assert_eq!(out, input);
        assert_eq!(mask.backward(&input), input);
    }

    #[test]
    fn zero_rate_train_mode_is_identity() {
        let spec = DropoutSpec::new(0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let input = Matrix::uniform(3, 4, 1.0, &mut rng);
        let (out, _) = spec.apply(&input, Mode::Train, &mut rng);
        assert_eq!(out, input);
    }

    #[test]
    fn survivor_fraction_matches_binomial_expectation() {
        let spec = DropoutSpec::new(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let input = Matrix::from_vec(100, 100, vec![1.0; 10_000]).unwrap();
        let (out, _) = spec.apply(&input, Mode::Train, &mut rng);
        let survivors = out.data().iter().filter(|&&v| v != 0.0).count();
        let fraction = survivors as f64 / 10_000.0;
        assert!((fraction - 0.5).abs() < 0.02, "fraction {fraction}");
        // survivors carry the inverted-dropout scale
        assert!(out
            .data()
            .iter()
            .all(|&v| v == 0.0 || (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn grad_reverse_flips_and_scales() {
        let g = Matrix::row_vector(&[2.0, -3.0]);
        assert_eq!(grad_reverse(&g, 1.0).data(), &[-2.0, 3.0]);
        assert!(grad_reverse(&g, 0.0).data().iter().all(|&v| v == 0.0));
        assert_eq!(grad_reverse(&Matrix::row_vector(&[4.0]), 0.5).data(), &[-2.0]);
    }

    #[test]
    fn grad_reverse_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let g1 = Matrix::uniform(2, 3, 1.0, &mut rng);
            let g2 = Matrix::uniform(2, 3, 1.0, &mut rng);
            let (a, b, lambda) = (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.0..3.0),
            );
            let mut combo = g1.scale(a);
            combo.add_assign(&g2.scale(b));
            let lhs = grad_reverse(&combo, lambda);
            let mut rhs = grad_reverse(&g1, lambda).scale(a);
            rhs.add_assign(&grad_reverse(&g2, lambda).scale(b));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}
