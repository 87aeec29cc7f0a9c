//! The generalized score distribution on the scale `1..=M`.
//!
//! An answer is `U = ψ + ε` where the mean `ψ ∈ [1, M]` is fixed and the
//! confidence parameter `ρ ∈ (0, 1]` moves the variance linearly between the
//! largest and the smallest value any distribution on the scale with mean `ψ`
//! can have. Below the regime boundary `C(ψ)` the law is a shifted
//! Beta-Binomial; at or above it, a mixture of the shifted Binomial with the
//! minimum-variance law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::sample::ScoreSample;
use crate::special::{ln_add_exp, ln_binomial_raw, ln_rising_prefix};

/// Number of categories of the usual five-level rating scale.
pub const DEFAULT_SCALE: u32 = 5;

/// Location `psi`, confidence `rho` and scale size `m` of one distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsdParams {
    psi: f64,
    rho: f64,
    m: u32,
}

impl GsdParams {
    pub fn new(psi: f64, rho: f64, m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("scale needs M >= 2, got {m}")));
        }
        if !(1.0..=m as f64).contains(&psi) {
            return Err(Error::InvalidParameter(format!("psi = {psi} outside [1, {m}]")));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!("rho = {rho} outside (0, 1]")));
        }
        Ok(Self { psi, rho, m })
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn num_categories(&self) -> u32 {
        self.m
    }

    /// `psi` sits on an end of the scale, so the law is a point mass there.
    pub fn is_degenerate(&self) -> bool {
        self.psi == 1.0 || self.psi == self.m as f64
    }
}

/// Variances attainable on the scale for a fixed mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBounds {
    /// Smallest variance of any law with this mean.
    pub v_min: f64,
    /// Largest variance of any law with this mean (two-point law on 1 and M).
    pub v_max: f64,
    /// Variance of the shifted Binomial with this mean.
    pub v_bin: f64,
    /// Confidence value at which the distribution is the shifted Binomial.
    /// `None` when `psi` is 1 or M and the ratio is 0/0.
    pub c: Option<f64>,
}

pub fn variance_bounds(psi: f64, m: u32) -> Result<VarianceBounds> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("scale needs M >= 2, got {m}")));
    }
    let top = m as f64;
    if !(1.0..=top).contains(&psi) {
        return Err(Error::InvalidParameter(format!("psi = {psi} outside [1, {m}]")));
    }
    let v_min = (psi.ceil() - psi) * (psi - psi.floor());
    let v_max = (psi - 1.0) * (top - psi);
    let v_bin = v_max / (top - 1.0);
    let c = if psi == 1.0 || psi == top {
        None
    } else if m == 2 {
        // Every law on two points is Bernoulli; the mixture weight formula
        // collapses with C = 0.
        Some(0.0)
    } else {
        Some((top - 2.0) / (top - 1.0) * v_max / (v_max - v_min))
    };
    Ok(VarianceBounds {
        v_min,
        v_max,
        v_bin,
        c,
    })
}

/// Which closed form produced the probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    PointMass,
    BetaBinomial,
    Mixture,
}

pub fn regime(params: &GsdParams) -> Regime {
    if params.is_degenerate() {
        return Regime::PointMass;
    }
    let c = variance_bounds(params.psi, params.m)
        .ok()
        .and_then(|b| b.c)
        .unwrap_or(0.0);
    if params.rho < c {
        Regime::BetaBinomial
    } else {
        Regime::Mixture
    }
}

/// Log-probabilities of the shifted Binomial with mean `psi`, for k = 1..=M.
fn shifted_binomial_log_probs(psi: f64, m: u32) -> Vec<f64> {
    let n = (m - 1) as u64;
    let ln_n = (n as f64).ln();
    let ln_up = (psi - 1.0).ln() - ln_n;
    let ln_down = (m as f64 - psi).ln() - ln_n;
    (0..=n)
        .map(|j| {
            let mut lp = ln_binomial_raw(n, j);
            if j > 0 {
                lp += j as f64 * ln_up;
            }
            if j < n {
                lp += (n - j) as f64 * ln_down;
            }
            lp
        })
        .collect()
}

/// `[1 - |k - psi|]_+`: mass on the one or two integers nearest to `psi`.
fn min_variance_prob(k: u32, psi: f64) -> f64 {
    (1.0 - (k as f64 - psi).abs()).max(0.0)
}

fn beta_binomial_log_probs(psi: f64, rho: f64, c: f64, m: u32) -> Vec<f64> {
    let n = (m - 1) as usize;
    let t = rho / (n as f64 * (c - rho));
    let alpha = (psi - 1.0) * t;
    let beta = (m as f64 - psi) * t;
    // ln B(alpha + j, beta + n - j) - ln B(alpha, beta) as rising factorials.
    let ra = ln_rising_prefix(alpha, n);
    let rb = ln_rising_prefix(beta, n);
    let rab = ln_rising_prefix(alpha + beta, n);
    (0..=n)
        .map(|j| ln_binomial_raw(n as u64, j as u64) + ra[j] + rb[n - j] - rab[n])
        .collect()
}

fn mixture_log_probs(psi: f64, rho: f64, c: f64, m: u32) -> Vec<f64> {
    let ln_w_min = ((rho - c) / (1.0 - c)).ln();
    let ln_w_bin = ((1.0 - rho) / (1.0 - c)).ln();
    shifted_binomial_log_probs(psi, m)
        .into_iter()
        .enumerate()
        .map(|(j, ln_bin)| {
            let ln_min = min_variance_prob(j as u32 + 1, psi).ln();
            ln_add_exp(ln_w_min + ln_min, ln_w_bin + ln_bin)
        })
        .collect()
}

/// `ln P(U = k)` for every `k = 1..=M` (index `k - 1`); `-inf` marks zero mass.
pub fn log_pmf_all(params: &GsdParams) -> Vec<f64> {
    let GsdParams { psi, rho, m } = *params;
    if params.is_degenerate() {
        let k = psi as u32;
        return (1..=m)
            .map(|j| if j == k { 0.0 } else { f64::NEG_INFINITY })
            .collect();
    }
    let c = variance_bounds(psi, m)
        .expect("validated parameters")
        .c
        .expect("interior psi has a regime boundary");
    if rho < c {
        beta_binomial_log_probs(psi, rho, c, m)
    } else {
        mixture_log_probs(psi, rho, c, m)
    }
}

/// `ln P(U = k)`; `-inf` when the category has no mass.
pub fn log_pmf(k: u32, params: &GsdParams) -> Result<f64> {
    if k < 1 || k > params.m {
        return Err(Error::InvalidParameter(format!(
            "category {k} outside 1..={}",
            params.m
        )));
    }
    Ok(log_pmf_all(params)[k as usize - 1])
}

pub fn pmf(params: &GsdParams) -> Pmf {
    Pmf::from_raw(log_pmf_all(params).into_iter().map(f64::exp).collect())
}

/// Mean and variance, summed over the probability vector.
pub fn mean_variance(params: &GsdParams) -> (f64, f64) {
    let p = pmf(params);
    (p.mean(), p.variance())
}

/// Variance predicted by the linear law `rho * v_min + (1 - rho) * v_max`.
pub fn linear_variance(params: &GsdParams) -> f64 {
    let b = variance_bounds(params.psi, params.m).expect("validated parameters");
    params.rho * b.v_min + (1.0 - params.rho) * b.v_max
}

/// `n` iid draws by inverse CDF from a generator seeded with `seed`.
pub fn sample(params: &GsdParams, n: usize, seed: u64) -> Result<ScoreSample> {
    sample_with_id("gsd", params, n, seed)
}

pub fn sample_with_id(id: &str, params: &GsdParams, n: usize, seed: u64) -> Result<ScoreSample> {
    pmf(params).draw(id, n, seed)
}
