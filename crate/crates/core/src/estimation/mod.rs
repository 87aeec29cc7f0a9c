//! Maximum-likelihood and moment estimators for the GSD and the Normal
//! comparison models.

mod gsd_fit;
mod normal_fit;
pub(crate) mod optimizer;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gsd_fit::{fit_gsd_mle, fit_gsd_moments, gsd_log_likelihood, gsd_log_likelihood_gradient};
pub use normal_fit::{fit_normal_moments, fit_qnormal_mle, qnormal_log_likelihood};

/// Optimizer settings shared by every maximum-likelihood fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Stop once the gradient norm of the mean per-observation
    /// log-likelihood (in the unconstrained coordinates) is at most this.
    pub grad_tolerance: f64,
    pub max_steps: usize,
    /// Central-difference step for the gradient.
    pub fd_step: f64,
    /// Coarse-grid starting points tried besides the moment estimate.
    pub n_restarts: usize,
    /// Keeps `psi` and `rho` this far from the ends of their ranges.
    pub boundary_margin: f64,
    pub initial_step: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            grad_tolerance: 1e-5,
            max_steps: 5000,
            fd_step: 1e-5,
            n_restarts: 4,
            boundary_margin: 1e-4,
            initial_step: 0.05,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tolerance", self.grad_tolerance),
            ("fd_step", self.fd_step),
            ("boundary_margin", self.boundary_margin),
            ("initial_step", self.initial_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be positive".into()));
        }
        if self.n_restarts == 0 {
            return Err(Error::InvalidParameter("n_restarts must be positive".into()));
        }
        if self.boundary_margin >= 0.01 {
            return Err(Error::InvalidParameter(format!(
                "boundary_margin must be below 0.01, got {}",
                self.boundary_margin
            )));
        }
        Ok(())
    }

    pub(crate) fn ascent(&self) -> optimizer::AscentSettings {
        optimizer::AscentSettings {
            grad_tolerance: self.grad_tolerance,
            max_steps: self.max_steps,
            fd_step: self.fd_step,
            initial_step: self.initial_step,
        }
    }
}

/// Outcome of one fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult<P> {
    pub params: P,
    pub log_likelihood: f64,
    pub converged: bool,
    /// Steps taken by the run that produced `params`.
    pub steps_used: usize,
    pub restarts_tried: usize,
    /// The estimate sits on a point mass at an end of the scale.
    pub degenerate: bool,
}
