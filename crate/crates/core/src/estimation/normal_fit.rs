use crate::error::{Error, Result};
use crate::normal::{linspace, qnormal_log_pmf_all, NormalParams};
use crate::sample::ScoreSample;

use super::gsd_fit::counts_log_likelihood;
use super::optimizer::{ascend, Outcome, Point};
use super::{FitConfig, FitResult};

const MIN_SIGMA: f64 = 1e-3;

pub fn qnormal_log_likelihood(sample: &ScoreSample, params: &NormalParams) -> Result<f64> {
    if sample.num_categories() != params.num_categories() {
        return Err(Error::InvalidParameter(format!(
            "sample uses M = {} but parameters use M = {}",
            sample.num_categories(),
            params.num_categories()
        )));
    }
    Ok(counts_log_likelihood(&sample.counts(), &qnormal_log_pmf_all(params)))
}

fn constant_sample_error(sample: &ScoreSample, k: u32) -> Error {
    Error::DegenerateSample(format!(
        "every answer of '{}' is {k}; the Normal spread is not identifiable",
        sample.id()
    ))
}

/// Sample mean and standard deviation (divisor `n - 1`).
pub fn fit_normal_moments(sample: &ScoreSample) -> Result<NormalParams> {
    if let Some(k) = sample.constant_value() {
        return Err(constant_sample_error(sample, k));
    }
    NormalParams::new(sample.mean(), sample.sample_variance().sqrt(), sample.num_categories())
}

/// Maximum-likelihood fit of the rounded, censored Normal over
/// `(psi_o, ln sigma_o)`.
pub fn fit_qnormal_mle(sample: &ScoreSample, config: &FitConfig) -> Result<FitResult<NormalParams>> {
    config.validate()?;
    if let Some(k) = sample.constant_value() {
        return Err(constant_sample_error(sample, k));
    }
    let m = sample.num_categories();
    let span = (m - 1) as f64;
    let counts = sample.counts();
    let n = sample.len() as f64;
    let ll = |x: Point| {
        let p = NormalParams::new(x[0], x[1].exp(), m).expect("box keeps sigma positive");
        counts_log_likelihood(&counts, &qnormal_log_pmf_all(&p))
    };
    let objective = |x: Point| ll(x) / n;
    let lower = [1.0 - 4.0 * span, MIN_SIGMA.ln()];
    let upper = [m as f64 + 4.0 * span, (10.0 * span).ln()];
    let settings = config.ascent();

    let moments = fit_normal_moments(sample)?;
    let mut starts = vec![[moments.psi_o(), moments.sigma_o().ln()]];
    let mut grid: Vec<(f64, Point)> = linspace(1.0, m as f64, 9)
        .into_iter()
        .flat_map(|psi| {
            [0.25, 0.5, 1.0, 2.0, 4.0]
                .into_iter()
                .map(move |s| [psi, (s * span / 4.0).ln()])
        })
        .map(|x| (objective(x), x))
        .filter(|(ll, _)| ll.is_finite())
        .collect();
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    starts.extend(grid.into_iter().take(config.n_restarts).map(|(_, x)| x));

    let mut best: Option<Outcome> = None;
    for &start in &starts {
        let out = ascend(&objective, start, lower, upper, &settings);
        if best.is_none_or(|b| out.value > b.value || !b.value.is_finite()) {
            best = Some(out);
        }
    }
    let best = best.expect("at least the moment start");
    Ok(FitResult {
        params: NormalParams::new(best.x[0], best.x[1].exp(), m)?,
        log_likelihood: ll(best.x),
        converged: best.converged,
        steps_used: best.steps,
        restarts_tried: starts.len(),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_examples() {
        let p = fit_normal_moments(&ScoreSample::new("a", vec![2, 3, 3, 4], 5).unwrap()).unwrap();
        assert_eq!(p.psi_o(), 3.0);
        assert!((p.sigma_o() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);

        let p = fit_normal_moments(&ScoreSample::new("b", vec![1, 5], 5).unwrap()).unwrap();
        assert_eq!(p.psi_o(), 3.0);
        assert!((p.sigma_o() - 8f64.sqrt()).abs() < 1e-15);

        let constant = ScoreSample::new("c", vec![4; 6], 5).unwrap();
        assert!(matches!(fit_normal_moments(&constant), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn mle_constant_sample_is_degenerate() {
        let s = ScoreSample::new("ones", vec![1; 24], 5).unwrap();
        assert!(matches!(
            fit_qnormal_mle(&s, &FitConfig::default()),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn mle_symmetric_sample() {
        let s = ScoreSample::from_counts("sym", &[1, 4, 6, 4, 1]).unwrap();
        let fit = fit_qnormal_mle(&s, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.params.psi_o() - 3.0).abs() < 1e-6, "{:?}", fit.params);
    }
}
