//! The batch pipeline: fit each model to each sample, test the fit, and
//! aggregate the p-values per model.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dist;
use crate::error::{Error, Result};
use crate::estimation::{fit_gsd_mle, fit_normal_moments, fit_qnormal_mle, qnormal_log_likelihood, FitConfig};
use crate::format::fmt_sig;
use crate::gof::{chi_squared_gof, global_pvalue_test, GofResult, DEFAULT_ALPHA, DEFAULT_MIN_EXPECTED};
use crate::normal::qnormal_pmf;
use crate::pmf::Pmf;
use crate::sample::ScoreSample;
use crate::simstudy::{fit_rho_prior, RhoPrior};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "GSD")]
    Gsd,
    #[serde(rename = "QNormal")]
    QNormal,
    #[serde(rename = "Normal")]
    Normal,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Gsd, Model::QNormal, Model::Normal];

    /// Parameters estimated from the sample.
    pub fn n_fitted_params(self) -> u32 {
        2
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Gsd => "GSD",
            Model::QNormal => "QNormal",
            Model::Normal => "Normal",
        })
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gsd" => Ok(Model::Gsd),
            "qnormal" => Ok(Model::QNormal),
            "normal" => Ok(Model::Normal),
            other => Err(format!("unknown model '{other}', expected gsd, qnormal or normal")),
        }
    }
}

/// A fitted model in the common shape used by reports: `location` is `psi`
/// or `psi_o`, `spread` is `rho` or `sigma_o`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    pub model: Model,
    pub location: f64,
    pub spread: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    pub steps_used: usize,
    pub restarts_tried: usize,
    pub degenerate: bool,
    #[serde(skip)]
    pub pmf: Pmf,
}

pub fn fit_model(sample: &ScoreSample, model: Model, config: &FitConfig) -> Result<ModelFit> {
    match model {
        Model::Gsd => {
            let fit = fit_gsd_mle(sample, config)?;
            Ok(ModelFit {
                model,
                location: fit.params.psi(),
                spread: fit.params.rho(),
                log_likelihood: fit.log_likelihood,
                converged: fit.converged,
                steps_used: fit.steps_used,
                restarts_tried: fit.restarts_tried,
                degenerate: fit.degenerate,
                pmf: dist::pmf(&fit.params),
            })
        }
        Model::QNormal => {
            let fit = fit_qnormal_mle(sample, config)?;
            Ok(ModelFit {
                model,
                location: fit.params.psi_o(),
                spread: fit.params.sigma_o(),
                log_likelihood: fit.log_likelihood,
                converged: fit.converged,
                steps_used: fit.steps_used,
                restarts_tried: fit.restarts_tried,
                degenerate: false,
                pmf: qnormal_pmf(&fit.params),
            })
        }
        Model::Normal => {
            let params = fit_normal_moments(sample)?;
            Ok(ModelFit {
                model,
                location: params.psi_o(),
                spread: params.sigma_o(),
                log_likelihood: qnormal_log_likelihood(sample, &params)?,
                converged: true,
                steps_used: 0,
                restarts_tried: 0,
                degenerate: false,
                pmf: qnormal_pmf(&params),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub alpha: f64,
    pub min_expected: f64,
    pub seed: u64,
    pub fit: FitConfig,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            min_expected: DEFAULT_MIN_EXPECTED,
            seed: 0,
            fit: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// Constant sample or point-mass estimate.
    Degenerate,
    NotConverged,
    /// Too few cells after merging for a χ² test.
    Untestable,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Degenerate => "degenerate",
            Flag::NotConverged => "not_converged",
            Flag::Untestable => "untestable",
        })
    }
}

/// One (sample, model) row. Fields are `None` when the step producing them
/// did not apply; the reason is in `flags`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRow {
    pub id: String,
    pub n: usize,
    pub model: Model,
    pub location: Option<f64>,
    pub spread: Option<f64>,
    pub loglik: Option<f64>,
    pub chi2: Option<f64>,
    pub df: Option<u32>,
    pub p_value: Option<f64>,
    pub flags: Vec<Flag>,
}

/// Fits `model`, then tests the fit with Pearson's χ².
pub fn fit_and_test(sample: &ScoreSample, model: Model, config: &BatchConfig) -> Result<BatchRow> {
    let mut row = BatchRow {
        id: sample.id().to_string(),
        n: sample.len(),
        model,
        location: None,
        spread: None,
        loglik: None,
        chi2: None,
        df: None,
        p_value: None,
        flags: Vec::new(),
    };
    let fit = match fit_model(sample, model, &config.fit) {
        Ok(fit) => fit,
        Err(Error::DegenerateSample(_)) => {
            row.flags.push(Flag::Degenerate);
            return Ok(row);
        }
        Err(e) => return Err(e),
    };
    row.location = Some(fit.location);
    row.spread = Some(fit.spread);
    row.loglik = Some(fit.log_likelihood);
    if fit.degenerate {
        row.flags.push(Flag::Degenerate);
    }
    if !fit.converged {
        row.flags.push(Flag::NotConverged);
    }
    match chi_squared_gof(sample, &fit.pmf, model.n_fitted_params(), config.min_expected) {
        Ok(GofResult {
            statistic, df, p_value, ..
        }) => {
            row.chi2 = Some(statistic);
            row.df = Some(df);
            row.p_value = Some(p_value);
        }
        Err(Error::Untestable { .. }) => row.flags.push(Flag::Untestable),
        Err(e) => return Err(e),
    }
    Ok(row)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub model: Model,
    pub n_rows: usize,
    /// Rows that produced a p-value.
    pub n_tests: usize,
    pub n_below_alpha: usize,
    pub fraction_below_alpha: Option<f64>,
    pub global_p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub source_path: String,
    pub n_samples: usize,
    pub config: BatchConfig,
    pub global: Vec<ModelSummary>,
    /// Normal fit to the GSD `rho` estimates of the non-degenerate samples;
    /// absent when fewer than two distinct estimates exist.
    pub rho_prior: Option<RhoPrior>,
    pub rows: Vec<BatchRow>,
}

impl BatchReport {
    pub fn summary(&self, model: Model) -> Option<&ModelSummary> {
        self.global.iter().find(|s| s.model == model)
    }
}

pub fn summarize_rows(rows: &[BatchRow], model: Model, alpha: f64) -> Result<ModelSummary> {
    let mine: Vec<&BatchRow> = rows.iter().filter(|r| r.model == model).collect();
    let pvalues: Vec<f64> = mine.iter().filter_map(|r| r.p_value).collect();
    let global = if pvalues.is_empty() {
        None
    } else {
        Some(global_pvalue_test(&pvalues, alpha)?)
    };
    Ok(ModelSummary {
        model,
        n_rows: mine.len(),
        n_tests: pvalues.len(),
        n_below_alpha: global.map_or(0, |g| g.n_below_alpha),
        fraction_below_alpha: global.map(|g| g.n_below_alpha as f64 / g.n_tests as f64),
        global_p_value: global.map(|g| g.p_value),
    })
}

/// Runs every model on every sample. Rows are ordered by sample, then by
/// model in [`Model::ALL`] order, independent of scheduling.
pub fn run_batch(dataset: &Dataset, config: &BatchConfig) -> Result<BatchReport> {
    if dataset.is_empty() {
        return Err(Error::InvalidParameter("dataset has no samples".into()));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {} outside (0, 1)", config.alpha)));
    }
    config.fit.validate()?;
    let rows: Vec<BatchRow> = dataset
        .samples
        .par_iter()
        .map(|s| {
            Model::ALL
                .iter()
                .map(|&model| fit_and_test(s, model, config))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let global = Model::ALL
        .iter()
        .map(|&m| summarize_rows(&rows, m, config.alpha))
        .collect::<Result<Vec<_>>>()?;
    let rho_hats: Vec<f64> = rows
        .iter()
        .filter(|r| r.model == Model::Gsd && !r.flags.contains(&Flag::Degenerate))
        .filter_map(|r| r.spread)
        .collect();
    let rho_prior = fit_rho_prior(&rho_hats).ok();
    Ok(BatchReport {
        source_path: dataset.source_path.clone(),
        n_samples: dataset.len(),
        config: *config,
        global,
        rho_prior,
        rows,
    })
}

pub const ROWS_HEADER: &str = "id,n,model,location,spread,loglik,chi2,df,p_value,flags";

pub fn write_rows_csv<W: Write>(rows: &[BatchRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_io = |e: csv::Error| std::io::Error::other(e);
    w.write_record(ROWS_HEADER.split(',')).map_err(to_io)?;
    let num = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    for r in rows {
        let flags: Vec<String> = r.flags.iter().map(Flag::to_string).collect();
        w.write_record([
            r.id.clone(),
            r.n.to_string(),
            r.model.to_string(),
            num(r.location),
            num(r.spread),
            num(r.loglik),
            num(r.chi2),
            r.df.map(|d| d.to_string()).unwrap_or_default(),
            num(r.p_value),
            flags.join(";"),
        ])
        .map_err(to_io)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(samples: Vec<ScoreSample>) -> Dataset {
        Dataset {
            samples,
            m: 5,
            source_path: "mem".into(),
        }
    }

    #[test]
    fn model_names() {
        assert_eq!("GSD".parse::<Model>().unwrap(), Model::Gsd);
        assert_eq!("qnormal".parse::<Model>().unwrap(), Model::QNormal);
        assert!("beta".parse::<Model>().is_err());
        assert_eq!(Model::QNormal.to_string(), "QNormal");
    }

    #[test]
    fn constant_sample_rows_are_flagged() {
        let s = ScoreSample::new("ones", vec![1; 24], 5).unwrap();
        let cfg = BatchConfig::default();
        let gsd = fit_and_test(&s, Model::Gsd, &cfg).unwrap();
        assert_eq!(gsd.location, Some(1.0));
        assert_eq!(gsd.spread, Some(1.0));
        assert!(gsd.flags.contains(&Flag::Degenerate));
        assert!(gsd.flags.contains(&Flag::Untestable));
        let normal = fit_and_test(&s, Model::Normal, &cfg).unwrap();
        assert_eq!(normal.flags, vec![Flag::Degenerate]);
        assert_eq!(normal.p_value, None);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        assert!(run_batch(&dataset(vec![]), &BatchConfig::default()).is_err());
    }

    #[test]
    fn single_sample_report() {
        let s = ScoreSample::from_counts("p1", &[2, 5, 9, 6, 2]).unwrap();
        let report = run_batch(&dataset(vec![s]), &BatchConfig::default()).unwrap();
        assert_eq!(report.rows.len(), 3);
        for m in Model::ALL {
            let summary = report.summary(m).unwrap();
            assert_eq!(summary.n_rows, 1);
            assert_eq!(summary.n_tests, 1);
        }
        assert!(report.rho_prior.is_none());
    }
}
