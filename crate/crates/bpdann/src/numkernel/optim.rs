//! Parameter updates: plain SGD or Adam-style adaptive moments.
//!
//! Gradients are always gradients of the loss to be minimized; the update
//! descends. Parameters are addressed by name so moment slots follow
//! parameters across calls and numeric failures can say which parameter
//! blew up.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
struct Slot {
    first_moment: Matrix,
    second_moment: Matrix,
    step: u64,
}

/// Optimizer state: learning rate, per-parameter moment accumulators and
/// step counters, lazily allocated on first sight of each parameter name.
#[derive(Debug, Clone)]
pub struct Optimizer {
    learning_rate: f64,
    kind: OptimizerKind,
    slots: HashMap<String, Slot>,
}

impl Optimizer {
    pub fn new(learning_rate: f64, kind: OptimizerKind) -> Result<Self> {
        if learning_rate <= 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        Ok(Self {
            learning_rate,
            kind,
            slots: HashMap::new(),
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Applies one update to a single named parameter.
    pub fn step_param(&mut self, name: &str, param: &mut Matrix, grad: &Matrix) -> Result<()> {
        if !param.same_shape(grad) {
            return Err(Error::Dimension(format!(
                "gradient shape {:?} != parameter {name} shape {:?}",
                grad.shape(),
                param.shape()
            )));
        }
        if !grad.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite gradient for parameter {name}"
            )));
        }
        match self.kind {
            OptimizerKind::Sgd => {
                param.add_scaled(grad, -self.learning_rate);
            }
            OptimizerKind::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let slot = self.slots.entry(name.to_string()).or_insert_with(|| Slot {
                    first_moment: Matrix::zeros(param.rows(), param.cols()),
                    second_moment: Matrix::zeros(param.rows(), param.cols()),
                    step: 0,
                });
                if !slot.first_moment.same_shape(param) {
                    return Err(Error::Dimension(format!(
                        "optimizer slot for {name} has stale shape"
                    )));
                }
                slot.step += 1;
                let t = slot.step as i32;
                let bc1 = 1.0 - beta1.powi(t);
                let bc2 = 1.0 - beta2.powi(t);
                let lr = self.learning_rate;
                for ((p, g), (m, v)) in param
                    .data_mut()
                    .iter_mut()
                    .zip(grad.data())
                    .zip(
                        slot.first_moment
                            .data_mut()
                            .iter_mut()
                            .zip(slot.second_moment.data_mut()),
                    )
                {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
                }
            }
        }
        Ok(())
    }

    /// Updates a set of named parameters from same-named gradients.
    pub fn step(
        &mut self,
        params: &mut [(String, &mut Matrix)],
        grads: &[(String, Matrix)],
    ) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::Dimension(format!(
                "{} parameters vs {} gradients",
                params.len(),
                grads.len()
            )));
        }
        for ((pname, param), (gname, grad)) in params.iter_mut().zip(grads) {
            if pname != gname {
                return Err(Error::State(format!(
                    "parameter/gradient order mismatch: {pname} vs {gname}"
                )));
            }
            self.step_param(pname, param, grad)?;
        }
        Ok(())
    }

    /// Drops all moment state (used when a partition is reinitialized).
    pub fn reset(&mut self) {
        self.slots.clear();
    }
}
