//! Simulation study of estimator accuracy: draw samples from a grid of true
//! parameters, refit, and summarize the errors.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{self, GsdParams, DEFAULT_SCALE};
use crate::error::{Error, Result};
use crate::estimation::{fit_gsd_mle, FitConfig};
use crate::format::fmt_sig;
use crate::normal::linspace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimDesign {
    pub n_values: Vec<usize>,
    pub psi_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub repetitions: usize,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: u32,
}

impl Default for SimDesign {
    fn default() -> Self {
        Self {
            n_values: vec![6, 12, 24, 48],
            psi_grid: linspace(1.05, 4.95, 23),
            rho_grid: linspace(0.01, 0.99, 23),
            repetitions: 30,
            seed: 1,
            m: DEFAULT_SCALE,
        }
    }
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_values.is_empty() || self.psi_grid.is_empty() || self.rho_grid.is_empty() {
            return bad("design grids must be nonempty".into());
        }
        if self.n_values.contains(&0) {
            return bad("sample sizes must be positive".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        for &psi in &self.psi_grid {
            for &rho in &self.rho_grid {
                GsdParams::new(psi, rho, self.m)?;
            }
        }
        Ok(())
    }

    pub fn num_records(&self) -> usize {
        self.n_values.len() * self.psi_grid.len() * self.rho_grid.len() * self.repetitions
    }

    /// (n, psi, rho, repetition) of the record at flat `index`; `n` varies
    /// slowest and the repetition fastest.
    fn cell(&self, index: usize) -> (usize, f64, f64, usize) {
        let rep = index % self.repetitions;
        let rest = index / self.repetitions;
        let rho = self.rho_grid[rest % self.rho_grid.len()];
        let rest = rest / self.rho_grid.len();
        let psi = self.psi_grid[rest % self.psi_grid.len()];
        let n = self.n_values[rest / self.psi_grid.len()];
        (n, psi, rho, rep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimRecord {
    pub n: usize,
    pub true_psi: f64,
    pub true_rho: f64,
    pub rep: usize,
    pub est_psi: f64,
    pub est_rho: f64,
    pub converged: bool,
    pub loglik: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the record at flat design index `index`: two rounds of
/// SplitMix64 over the master seed and the index, so any subset of records
/// can be regenerated on its own.
pub fn record_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Runs every (n, psi, rho, repetition) cell of the design. Records come back
/// in design order whatever the thread count.
pub fn run_sim_study(design: &SimDesign, config: &FitConfig) -> Result<Vec<SimRecord>> {
    design.validate()?;
    config.validate()?;
    (0..design.num_records())
        .into_par_iter()
        .map(|index| {
            let (n, psi, rho, rep) = design.cell(index);
            let truth = GsdParams::new(psi, rho, design.m)?;
            let sample = dist::sample(&truth, n, record_seed(design.seed, index as u64))?;
            let fit = fit_gsd_mle(&sample, config)?;
            if !fit.converged {
                log::debug!("record {index} (n={n}, psi={psi}, rho={rho}, rep={rep}) did not converge");
            }
            Ok(SimRecord {
                n,
                true_psi: psi,
                true_rho: rho,
                rep,
                est_psi: fit.params.psi(),
                est_rho: fit.params.rho(),
                converged: fit.converged,
                loglik: fit.log_likelihood,
            })
        })
        .collect()
}

pub const RECORDS_HEADER: &str = "n,true_psi,true_rho,rep,est_psi,est_rho,converged,loglik";

pub fn write_records_csv<W: Write>(records: &[SimRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            fmt_sig(r.true_psi),
            fmt_sig(r.true_rho),
            r.rep,
            fmt_sig(r.est_psi),
            fmt_sig(r.est_rho),
            r.converged,
            fmt_sig(r.loglik)
        )?;
    }
    Ok(())
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Bias and central 95% band of a set of signed errors (true − estimate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorStats {
    pub count: usize,
    pub bias: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ErrorStats {
    pub fn from_errors(errors: &[f64]) -> Option<Self> {
        if errors.is_empty() {
            return None;
        }
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            count: sorted.len(),
            bias: sorted.iter().sum::<f64>() / sorted.len() as f64,
            median: quantile(&sorted, 0.5),
            lower: quantile(&sorted, 0.025),
            upper: quantile(&sorted, 0.975),
        })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinStats {
    pub true_value: f64,
    pub psi_error: ErrorStats,
    pub rho_error: ErrorStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSizeSummary {
    pub n: usize,
    pub records: usize,
    pub converged: usize,
    pub psi_error: ErrorStats,
    pub rho_error: ErrorStats,
    /// Errors grouped by the true `psi` of the record.
    pub by_true_psi: Vec<BinStats>,
    /// Errors grouped by the true `rho` of the record.
    pub by_true_rho: Vec<BinStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracySummary {
    pub per_n: Vec<SampleSizeSummary>,
}

impl AccuracySummary {
    pub fn for_n(&self, n: usize) -> Option<&SampleSizeSummary> {
        self.per_n.iter().find(|s| s.n == n)
    }
}

fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn bin_stats(records: &[&SimRecord], key: impl Fn(&SimRecord) -> f64) -> Vec<BinStats> {
    distinct_sorted(records.iter().map(|r| key(r)))
        .into_iter()
        .filter_map(|value| {
            let group: Vec<&&SimRecord> = records.iter().filter(|r| key(r) == value).collect();
            let psi: Vec<f64> = group.iter().map(|r| r.true_psi - r.est_psi).collect();
            let rho: Vec<f64> = group.iter().map(|r| r.true_rho - r.est_rho).collect();
            Some(BinStats {
                true_value: value,
                psi_error: ErrorStats::from_errors(&psi)?,
                rho_error: ErrorStats::from_errors(&rho)?,
            })
        })
        .collect()
}

/// Per-sample-size error statistics over the converged records.
pub fn accuracy_summary(records: &[SimRecord]) -> Result<AccuracySummary> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no simulation records".into()));
    }
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let per_n = ns
        .into_iter()
        .filter_map(|n| {
            let all: Vec<&SimRecord> = records.iter().filter(|r| r.n == n).collect();
            let ok: Vec<&SimRecord> = all.iter().copied().filter(|r| r.converged).collect();
            let psi: Vec<f64> = ok.iter().map(|r| r.true_psi - r.est_psi).collect();
            let rho: Vec<f64> = ok.iter().map(|r| r.true_rho - r.est_rho).collect();
            Some(SampleSizeSummary {
                n,
                records: all.len(),
                converged: ok.len(),
                psi_error: ErrorStats::from_errors(&psi)?,
                rho_error: ErrorStats::from_errors(&rho)?,
                by_true_psi: bin_stats(&ok, |r| r.true_psi),
                by_true_rho: bin_stats(&ok, |r| r.true_rho),
            })
        })
        .collect();
    Ok(AccuracySummary { per_n })
}

pub const ERRORS_HEADER: &str = "n,true_psi,est_psi,psi_error,true_rho,est_rho,rho_error,converged";

/// True-versus-estimated scatter data with the signed errors.
pub fn write_errors_csv<W: Write>(records: &[SimRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{ERRORS_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            fmt_sig(r.true_psi),
            fmt_sig(r.est_psi),
            fmt_sig(r.true_psi - r.est_psi),
            fmt_sig(r.true_rho),
            fmt_sig(r.est_rho),
            fmt_sig(r.true_rho - r.est_rho),
            r.converged
        )?;
    }
    Ok(())
}

/// Normal law for `rho` estimates, with mass above 1 truncated to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoPrior {
    pub mu: f64,
    pub sigma: f64,
    pub upper: f64,
}

/// Moment fit: sample mean and standard deviation (divisor `n - 1`).
pub fn fit_rho_prior(rho_hats: &[f64]) -> Result<RhoPrior> {
    if rho_hats.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 rho estimates, got {}",
            rho_hats.len()
        )));
    }
    if let Some(bad) = rho_hats.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::InvalidParameter(format!("rho estimate {bad} outside (0, 1]")));
    }
    if rho_hats.iter().all(|&r| r == rho_hats[0]) {
        return Err(Error::DegenerateSample("all rho estimates are equal".into()));
    }
    let n = rho_hats.len() as f64;
    let mu = rho_hats.iter().sum::<f64>() / n;
    let var = rho_hats.iter().map(|r| (r - mu).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(RhoPrior {
        mu,
        sigma: var.sqrt(),
        upper: 1.0,
    })
}
