//! Minimal dense/recurrent network kernel with hand-derived reverse-mode
//! gradients, an optimizer, and a finite-difference gradient checker.

pub mod activation;
pub mod dense;
pub mod dropout;
pub mod gradcheck;
pub mod lstm;
pub mod matrix;
pub mod optim;

pub use activation::Activation;
pub use dense::{DenseGradients, DenseLayer};
pub use dropout::{grad_reverse, DropoutMask, DropoutSpec, Mode};
pub use gradcheck::{finite_diff_check, GradCheckReport, ParamAccess, DEFAULT_EPS, DEFAULT_TOL};
pub use lstm::{LstmCache, LstmGradients, LstmLayer};
pub use matrix::Matrix;
pub use optim::{Optimizer, OptimizerKind};
