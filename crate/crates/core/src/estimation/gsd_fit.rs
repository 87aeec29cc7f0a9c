use crate::dist::{self, variance_bounds, GsdParams};
use crate::error::Result;
use crate::normal::linspace;
use crate::sample::ScoreSample;

use super::optimizer::{ascend, fd_gradient, logistic, logit, Outcome, Point};
use super::{FitConfig, FitResult};

/// Σ count_k · ln p_k, skipping empty categories.
pub(crate) fn counts_log_likelihood(counts: &[u64], log_probs: &[f64]) -> f64 {
    counts
        .iter()
        .zip(log_probs)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &lp)| c as f64 * lp)
        .sum()
}

/// Log-likelihood of the sample; `-inf` if any answer has zero probability.
pub fn gsd_log_likelihood(sample: &ScoreSample, params: &GsdParams) -> Result<f64> {
    check_scale(sample, params)?;
    Ok(counts_log_likelihood(&sample.counts(), &dist::log_pmf_all(params)))
}

fn check_scale(sample: &ScoreSample, params: &GsdParams) -> Result<()> {
    if sample.num_categories() != params.num_categories() {
        return Err(crate::Error::InvalidParameter(format!(
            "sample uses M = {} but parameters use M = {}",
            sample.num_categories(),
            params.num_categories()
        )));
    }
    Ok(())
}

/// Method of moments: mean for `psi`, and `rho` from inverting the linear
/// variance law with the divisor-`n` sample variance.
pub fn fit_gsd_moments(sample: &ScoreSample, config: &FitConfig) -> GsdParams {
    let m = sample.num_categories();
    let psi = sample.mean().clamp(1.0, m as f64);
    let b = variance_bounds(psi, m).expect("psi clamped into range");
    let rho = if b.v_max == b.v_min {
        1.0
    } else {
        ((b.v_max - sample.population_variance()) / (b.v_max - b.v_min)).clamp(config.boundary_margin, 1.0)
    };
    GsdParams::new(psi, rho, m).expect("moment estimate inside the domain")
}

/// Maps between `(psi, rho)` and the unconstrained `(a, b)` the optimizer
/// works in: `psi = 1 + (M - 1) logistic(a)`, `rho = logistic(b)`.
#[derive(Debug, Clone, Copy)]
struct Coordinates {
    m: u32,
    margin: f64,
}

impl Coordinates {
    fn span(&self) -> f64 {
        (self.m - 1) as f64
    }

    fn to_params(self, x: Point) -> (f64, f64) {
        (1.0 + self.span() * logistic(x[0]), logistic(x[1]))
    }

    fn to_point(self, psi: f64, rho: f64) -> Point {
        let [lo, hi] = self.bounds();
        let a = logit((psi - 1.0) / self.span());
        let b = logit(rho);
        [a.clamp(lo[0], hi[0]), b.clamp(lo[1], hi[1])]
    }

    fn bounds(&self) -> [Point; 2] {
        let frac = self.margin / self.span();
        [
            [logit(frac), logit(self.margin)],
            [logit(1.0 - frac), logit(1.0 - self.margin)],
        ]
    }

    fn psi_derivative(&self, a: f64) -> f64 {
        let s = logistic(a);
        self.span() * s * (1.0 - s)
    }
}

fn params_ll(counts: &[u64], psi: f64, rho: f64, m: u32) -> f64 {
    match GsdParams::new(psi, rho, m) {
        Ok(p) => counts_log_likelihood(counts, &dist::log_pmf_all(&p)),
        Err(_) => f64::NEG_INFINITY,
    }
}

fn coarse_starts(counts: &[u64], m: u32, n: usize) -> Vec<(f64, f64)> {
    let span = (m - 1) as f64;
    let psis = linspace(1.0 + 0.05 * span, m as f64 - 0.05 * span, 9);
    let rhos = linspace(0.05, 0.95, 10);
    let mut scored: Vec<(f64, (f64, f64))> = psis
        .iter()
        .flat_map(|&psi| rhos.iter().map(move |&rho| (psi, rho)))
        .map(|(psi, rho)| (params_ll(counts, psi, rho, m), (psi, rho)))
        .filter(|(ll, _)| ll.is_finite())
        .collect();
    // Stable sort: equal scores keep grid order, so the first n starts are a
    // prefix of the first n + 1.
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.into_iter().take(n).map(|(_, p)| p).collect()
}

/// Gradient of the log-likelihood in `(psi, rho)`, obtained exactly as the
/// optimizer sees it (central differences in the unconstrained coordinates)
/// and mapped back with the chain rule.
pub fn gsd_log_likelihood_gradient(sample: &ScoreSample, params: &GsdParams, config: &FitConfig) -> Result<(f64, f64)> {
    check_scale(sample, params)?;
    let m = params.num_categories();
    let counts = sample.counts();
    let coords = Coordinates {
        m,
        margin: config.boundary_margin,
    };
    let objective = |x: Point| {
        let (psi, rho) = coords.to_params(x);
        params_ll(&counts, psi, rho, m)
    };
    let x = [logit((params.psi() - 1.0) / coords.span()), logit(params.rho())];
    let g = fd_gradient(&objective, x, config.fd_step);
    let rho = params.rho();
    Ok((g[0] / coords.psi_derivative(x[0]), g[1] / (rho * (1.0 - rho))))
}

/// Maximum-likelihood fit of `(psi, rho)`.
///
/// Runs the ascent from the moment estimate and from the `n_restarts`
/// best points of a coarse grid, and keeps the run with the highest
/// log-likelihood. Estimates within `boundary_margin` of `rho = 1` are
/// snapped to 1 when that does not lower the likelihood.
pub fn fit_gsd_mle(sample: &ScoreSample, config: &FitConfig) -> Result<FitResult<GsdParams>> {
    config.validate()?;
    let m = sample.num_categories();
    if let Some(k) = sample.constant_value() {
        let params = GsdParams::new(k as f64, 1.0, m)?;
        return Ok(FitResult {
            params,
            log_likelihood: 0.0,
            converged: true,
            steps_used: 0,
            restarts_tried: 0,
            degenerate: params.is_degenerate(),
        });
    }
    let counts = sample.counts();
    let coords = Coordinates {
        m,
        margin: config.boundary_margin,
    };
    let [lower, upper] = coords.bounds();
    // Per-observation scale keeps the gradient tolerance meaningful for any N.
    let n = sample.len() as f64;
    let objective = |x: Point| {
        let (psi, rho) = coords.to_params(x);
        params_ll(&counts, psi, rho, m) / n
    };
    let settings = config.ascent();

    let moments = fit_gsd_moments(sample, config);
    let mut starts = vec![(moments.psi(), moments.rho())];
    starts.extend(coarse_starts(&counts, m, config.n_restarts));

    let mut best: Option<Outcome> = None;
    for &(psi, rho) in &starts {
        let out = ascend(&objective, coords.to_point(psi, rho), lower, upper, &settings);
        log::trace!("start ({psi:.3}, {rho:.3}) -> ll {:.6} converged {}", out.value, out.converged);
        if best.is_none_or(|b| out.value > b.value || !b.value.is_finite()) {
            best = Some(out);
        }
    }
    let best = best.expect("at least the moment start");
    let (mut psi, mut rho) = coords.to_params(best.x);
    let value = best.value;
    let mut converged = best.converged;
    let mut steps = best.steps;

    if rho >= 1.0 - config.boundary_margin * (1.0 + 1e-9) {
        // Refit psi with rho pinned at 1, where the law is the
        // minimum-variance one.
        let pinned = |x: Point| params_ll(&counts, coords.to_params(x).0, 1.0, m) / n;
        let out = ascend(&pinned, [best.x[0], 0.0], [lower[0], 0.0], [upper[0], 0.0], &settings);
        if out.value.is_finite() && out.value >= value {
            psi = coords.to_params(out.x).0;
            rho = 1.0;
            converged = out.converged;
            steps = out.steps;
        }
    }

    let params = GsdParams::new(psi, rho, m)?;
    Ok(FitResult {
        params,
        log_likelihood: params_ll(&counts, psi, rho, m),
        converged,
        steps_used: steps,
        restarts_tried: starts.len(),
        degenerate: false,
    })
}
