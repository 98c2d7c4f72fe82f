//! Central finite-difference gradient checker.
//!
//! Perturbs every parameter of a (small) network, recomputes the loss, and
//! compares `(L(p+eps) - L(p-eps)) / 2*eps` against the analytic gradient.
//! The check only ever calls the forward path, so it is independent of the
//! backward code it validates.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Default perturbation for central differences.
pub const DEFAULT_EPS: f64 = 1e-5;
/// Default pass tolerance on the relative error.
pub const DEFAULT_TOL: f64 = 1e-4;

/// Anything exposing its parameters as named matrices, in a stable order.
pub trait ParamAccess {
    fn params_mut(&mut self) -> Vec<(String, &mut Matrix)>;
}

#[derive(Debug, Clone)]
pub struct ParamCheck {
    pub name: String,
    pub max_rel_err: f64,
    pub elements: usize,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub per_param: Vec<ParamCheck>,
    pub max_rel_err: f64,
    pub worst_param: String,
    pub tol: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= self.tol
    }
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    // Both effectively zero: agreement, not error.
    if scale < 1e-7 {
        return 0.0;
    }
    (analytic - numeric).abs() / scale
}

/// Checks `analytic` (named like the model's parameters) against central
/// differences of `loss`. Parameter names missing from the model are an
/// error; parameters missing from `analytic` are skipped.
pub fn finite_diff_check<M, F>(
    model: &mut M,
    analytic: &[(String, Matrix)],
    eps: f64,
    tol: f64,
    mut loss: F,
) -> Result<GradCheckReport>
where
    M: ParamAccess,
    F: FnMut(&M) -> Result<f64>,
{
    let base = loss(model)?;
    if !base.is_finite() {
        return Err(Error::Numeric(format!("loss is non-finite: {base}")));
    }

    let mut per_param = Vec::with_capacity(analytic.len());
    let mut max_rel_err: f64 = 0.0;
    let mut worst_param = String::new();

    for (name, grad) in analytic {
        // Locate the parameter and capture its shape.
        let shape = {
            let params = model.params_mut();
            let found = params
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::State(format!("model has no parameter named {name}")))?;
            found.1.shape()
        };
        if grad.shape() != shape {
            return Err(Error::Dimension(format!(
                "analytic gradient for {name} has shape {:?}, parameter has {:?}",
                grad.shape(),
                shape
            )));
        }

        let mut param_worst: f64 = 0.0;
        for idx in 0..grad.data().len() {
            let orig = {
                let mut params = model.params_mut();
                let p = params.iter_mut().find(|(n, _)| n == name).unwrap();
                let orig = p.1.data()[idx];
                p.1.data_mut()[idx] = orig + eps;
                orig
            };
            let plus = loss(model)?;
            {
                let mut params = model.params_mut();
                let p = params.iter_mut().find(|(n, _)| n == name).unwrap();
                p.1.data_mut()[idx] = orig - eps;
            }
            let minus = loss(model)?;
            {
                let mut params = model.params_mut();
                let p = params.iter_mut().find(|(n, _)| n == name).unwrap();
                p.1.data_mut()[idx] = orig;
            }
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss while perturbing {name}[{idx}]"
                )));
            }
            let numeric = (plus - minus) / (2.0 * eps);
            let rel = relative_error(grad.data()[idx], numeric);
            param_worst = param_worst.max(rel);
        }
        if param_worst > max_rel_err {
            max_rel_err = param_worst;
            worst_param = name.clone();
        }
        per_param.push(ParamCheck {
            name: name.clone(),
            max_rel_err: param_worst,
            elements: grad.data().len(),
        });
    }

    Ok(GradCheckReport {
        per_param,
        max_rel_err,
        worst_param,
        tol,
    })
}
