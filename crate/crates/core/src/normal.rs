//! Continuous comparison model: a Normal answer rounded to the nearest
//! category, with everything below 1.5 censored to 1 and everything above
//! M − 0.5 censored to M.

use serde::{Deserialize, Serialize};

use crate::dist::variance_bounds;
use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::special::std_normal_interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalParams {
    psi_o: f64,
    sigma_o: f64,
    m: u32,
}

impl NormalParams {
    pub fn new(psi_o: f64, sigma_o: f64, m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("scale needs M >= 2, got {m}")));
        }
        if !psi_o.is_finite() {
            return Err(Error::InvalidParameter(format!("psi_o = {psi_o} is not finite")));
        }
        if !(sigma_o > 0.0) || !sigma_o.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma_o = {sigma_o} must be positive")));
        }
        Ok(Self { psi_o, sigma_o, m })
    }

    pub fn psi_o(&self) -> f64 {
        self.psi_o
    }

    pub fn sigma_o(&self) -> f64 {
        self.sigma_o
    }

    pub fn num_categories(&self) -> u32 {
        self.m
    }
}

/// Mean and variance of the rounded, censored answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscretizedMoments {
    pub psi_u: f64,
    pub sigma_u_sq: f64,
}

fn category_probs(params: &NormalParams) -> Vec<f64> {
    let NormalParams { psi_o, sigma_o, m } = *params;
    let z = |edge: f64| (edge - psi_o) / sigma_o;
    (1..=m)
        .map(|k| {
            let lo = if k == 1 { f64::NEG_INFINITY } else { z(k as f64 - 0.5) };
            let hi = if k == m { f64::INFINITY } else { z(k as f64 + 0.5) };
            std_normal_interval(lo, hi)
        })
        .collect()
}

pub fn qnormal_pmf(params: &NormalParams) -> Pmf {
    Pmf::from_raw(category_probs(params))
}

pub fn qnormal_log_pmf_all(params: &NormalParams) -> Vec<f64> {
    category_probs(params).into_iter().map(f64::ln).collect()
}

pub fn discretization_map(params: &NormalParams) -> DiscretizedMoments {
    let pmf = qnormal_pmf(params);
    DiscretizedMoments {
        psi_u: pmf.mean(),
        sigma_u_sq: pmf.variance(),
    }
}

/// One point of the mean/variance distortion curve at fixed `sigma_o`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub sigma_o: f64,
    pub psi_o: f64,
    pub psi_u: f64,
    pub sigma_u_sq: f64,
}

/// Discretized moments along `psi_grid` for one `sigma_o`.
pub fn distortion_curve(psi_grid: &[f64], sigma_o: f64, m: u32) -> Result<Vec<CurvePoint>> {
    psi_grid
        .iter()
        .map(|&psi_o| {
            let d = discretization_map(&NormalParams::new(psi_o, sigma_o, m)?);
            Ok(CurvePoint {
                sigma_o,
                psi_o,
                psi_u: d.psi_u,
                sigma_u_sq: d.sigma_u_sq,
            })
        })
        .collect()
}

/// Discretized variance when the continuous variance is set to the largest
/// variance a discrete answer with that mean could have.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CeilingPoint {
    pub psi_o: f64,
    pub v_max: f64,
    pub sigma_u_sq: f64,
}

pub fn variance_ceiling_map(psi_grid: &[f64], m: u32) -> Result<Vec<CeilingPoint>> {
    psi_grid
        .iter()
        .map(|&psi_o| {
            let v_max = variance_bounds(psi_o, m)?.v_max;
            let sigma_u_sq = if v_max == 0.0 {
                0.0
            } else {
                discretization_map(&NormalParams::new(psi_o, v_max.sqrt(), m)?).sigma_u_sq
            };
            Ok(CeilingPoint {
                psi_o,
                v_max,
                sigma_u_sq,
            })
        })
        .collect()
}

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}
