//! Pearson χ² goodness of fit for one sample, and the binomial meta-test
//! over a collection of per-sample p-values.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::sample::ScoreSample;
use crate::special::{chi_squared_sf, ln_add_exp, ln_binomial_raw};

/// Default lower bound on the expected count of a (merged) cell.
pub const DEFAULT_MIN_EXPECTED: f64 = 1.0;

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// An inclusive run of adjacent categories (1-based) tested as one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellRange {
    pub first: u32,
    pub last: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    /// Cells after merging, in scale order; `expected` and `observed` are
    /// indexed the same way.
    pub merged_cells: Vec<CellRange>,
    pub expected: Vec<f64>,
    pub observed: Vec<u64>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    first: usize,
    last: usize,
    expected: f64,
    observed: u64,
}

impl Cell {
    fn absorb(&mut self, other: Cell) {
        self.first = self.first.min(other.first);
        self.last = self.last.max(other.last);
        self.expected += other.expected;
        self.observed += other.observed;
    }
}

/// Repeatedly takes the cell with the smallest expected count below
/// `min_expected` (leftmost on ties) and merges it into its neighbour on the
/// side of the nearer end of the scale. End cells merge inward; a cell
/// centred exactly on the midpoint merges into its smaller neighbour.
fn merge_cells(mut cells: Vec<Cell>, min_expected: f64, num_categories: usize) -> Vec<Cell> {
    let mid = (num_categories - 1) as f64 / 2.0;
    while cells.len() > 1 {
        let Some(i) = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.expected < min_expected)
            .min_by(|a, b| a.1.expected.total_cmp(&b.1.expected))
            .map(|(i, _)| i)
        else {
            break;
        };
        let last = cells.len() - 1;
        let center = (cells[i].first + cells[i].last) as f64 / 2.0;
        let toward_left = if i == 0 {
            false
        } else if i == last {
            true
        } else if center < mid {
            true
        } else if center > mid {
            false
        } else {
            cells[i - 1].expected <= cells[i + 1].expected
        };
        let j = if toward_left { i - 1 } else { i + 1 };
        let removed = cells.remove(i);
        let target = if toward_left { j } else { j - 1 };
        cells[target].absorb(removed);
    }
    cells
}

/// Pearson χ² test of `sample` against `model`.
///
/// Expected counts are `N p_k`; cells are merged until each expects at
/// least `min_expected` answers, and the degrees of freedom are
/// `cells - 1 - n_fitted_params`. Fails with [`Error::Untestable`] when that
/// would be below one.
pub fn chi_squared_gof(
    sample: &ScoreSample,
    model: &Pmf,
    n_fitted_params: u32,
    min_expected: f64,
) -> Result<GofResult> {
    let m = sample.num_categories();
    if model.num_categories() != m {
        return Err(Error::InvalidParameter(format!(
            "sample uses M = {m} but the model has {} categories",
            model.num_categories()
        )));
    }
    if n_fitted_params > 2 {
        return Err(Error::InvalidParameter(format!(
            "n_fitted_params must be 0, 1 or 2, got {n_fitted_params}"
        )));
    }
    if !(min_expected > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "min_expected must be positive, got {min_expected}"
        )));
    }
    let n = sample.len() as f64;
    let cells: Vec<Cell> = sample
        .counts()
        .into_iter()
        .zip(model.probs())
        .enumerate()
        .map(|(i, (observed, &p))| Cell {
            first: i,
            last: i,
            expected: n * p,
            observed,
        })
        .collect();
    let cells = merge_cells(cells, min_expected, m as usize);

    if cells.len() <= 1 + n_fitted_params as usize {
        return Err(Error::Untestable {
            cells: cells.len(),
            fitted: n_fitted_params as usize,
        });
    }
    let statistic: f64 = cells
        .iter()
        .map(|c| (c.observed as f64 - c.expected).powi(2) / c.expected)
        .sum();
    let df = (cells.len() - 1 - n_fitted_params as usize).max(1) as u32;
    let p_value = chi_squared_sf(statistic, df as f64)?;
    Ok(GofResult {
        statistic,
        df,
        p_value,
        merged_cells: cells
            .iter()
            .map(|c| CellRange {
                first: c.first as u32 + 1,
                last: c.last as u32 + 1,
            })
            .collect(),
        expected: cells.iter().map(|c| c.expected).collect(),
        observed: cells.iter().map(|c| c.observed).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalTestResult {
    pub n_tests: usize,
    pub n_below_alpha: usize,
    pub alpha: f64,
    pub p_value: f64,
}

/// P(X ≥ x) for X ~ Binomial(n, p), summed in log space.
pub fn binomial_upper_tail(n: u64, p: f64, x: u64) -> f64 {
    if x == 0 {
        return 1.0;
    }
    if x > n {
        return 0.0;
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let ln_term = |k: u64| ln_binomial_raw(n, k) + k as f64 * ln_p + (n - k) as f64 * ln_q;
    // Above the mean the upper tail is summed directly, so small p-values keep
    // their relative precision; below it the complement is accurate.
    if x as f64 > n as f64 * p {
        let ln_sum = (x..=n).map(ln_term).fold(f64::NEG_INFINITY, ln_add_exp);
        ln_sum.exp().min(1.0)
    } else {
        let ln_lower = (0..x).map(ln_term).fold(f64::NEG_INFINITY, ln_add_exp);
        (1.0 - ln_lower.exp()).max(0.0)
    }
}

/// Exact one-sided binomial test of H0: P(p-value < alpha) ≤ alpha.
pub fn global_pvalue_test(pvalues: &[f64], alpha: f64) -> Result<GlobalTestResult> {
    if pvalues.is_empty() {
        return Err(Error::InvalidParameter("no p-values to test".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 1)")));
    }
    if let Some(bad) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter(format!("p-value {bad} outside [0, 1]")));
    }
    let below = pvalues.iter().filter(|&&p| p < alpha).count();
    Ok(GlobalTestResult {
        n_tests: pvalues.len(),
        n_below_alpha: below,
        alpha,
        p_value: binomial_upper_tail(pvalues.len() as u64, alpha, below as u64),
    })
}

/// Counts of `pvalues` in `n_bins` equal-width bins over [0, 1]; the last
/// bin is closed on the right.
pub fn pvalue_histogram(pvalues: &[f64], n_bins: usize) -> Result<Vec<u64>> {
    if n_bins < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 bins, got {n_bins}")));
    }
    let mut counts = vec![0u64; n_bins];
    for &p in pvalues {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p-value {p} outside [0, 1]")));
        }
        let bin = ((p * n_bins as f64) as usize).min(n_bins - 1);
        counts[bin] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom_pmf() -> Pmf {
        Pmf::new([1.0, 4.0, 6.0, 4.0, 1.0].map(|x| x / 16.0).to_vec()).unwrap()
    }

    #[test]
    fn exact_match_has_zero_statistic() {
        let s = ScoreSample::from_counts("a", &[10, 40, 60, 40, 10]).unwrap();
        let r = chi_squared_gof(&s, &binom_pmf(), 2, 1.0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.df, 2);
        assert_eq!(r.merged_cells.len(), 5);
    }

    #[test]
    fn hand_computed_statistic() {
        let s = ScoreSample::from_counts("a", &[20, 30, 60, 40, 10]).unwrap();
        let r = chi_squared_gof(&s, &binom_pmf(), 2, 1.0).unwrap();
        assert!((r.statistic - 12.5).abs() < 1e-12);
        assert_eq!(r.df, 2);
        assert!((r.p_value - (-6.25f64).exp()).abs() < 1e-12);
        assert!((r.p_value - 0.001_930_454_136_227_709).abs() < 1e-12);
    }

    #[test]
    fn point_mass_is_untestable() {
        let s = ScoreSample::new("a", vec![3; 24], 5).unwrap();
        let pmf = Pmf::point_mass(3, 5);
        assert!(matches!(
            chi_squared_gof(&s, &pmf, 2, 1.0),
            Err(Error::Untestable { cells: 1, fitted: 2 })
        ));
    }

    #[test]
    fn merging_goes_toward_nearer_end() {
        // N = 20: expected (0.4, 2, 15.2, 2, 0.4); cells 1 and 5 are merged
        // inward first, leaving three cells.
        let pmf = Pmf::new(vec![0.02, 0.1, 0.76, 0.1, 0.02]).unwrap();
        let s = ScoreSample::from_counts("a", &[1, 2, 14, 2, 1]).unwrap();
        let r = chi_squared_gof(&s, &pmf, 0, 1.0).unwrap();
        assert_eq!(
            r.merged_cells,
            vec![
                CellRange { first: 1, last: 2 },
                CellRange { first: 3, last: 3 },
                CellRange { first: 4, last: 5 }
            ]
        );
        assert_eq!(r.observed, vec![3, 14, 3]);
        assert!((r.expected.iter().sum::<f64>() - 20.0).abs() < 1e-12);

        // U-shaped model: the sparse cell 2 joins cell 1, cell 4 joins cell 5.
        let pmf = Pmf::new(vec![0.45, 0.02, 0.06, 0.02, 0.45]).unwrap();
        let s = ScoreSample::from_counts("b", &[9, 1, 1, 0, 9]).unwrap();
        let r = chi_squared_gof(&s, &pmf, 0, 1.0).unwrap();
        assert_eq!(r.merged_cells[0], CellRange { first: 1, last: 2 });
        assert_eq!(*r.merged_cells.last().unwrap(), CellRange { first: 4, last: 5 });
    }

    #[test]
    fn input_validation() {
        let s = ScoreSample::from_counts("a", &[1, 1, 1]).unwrap();
        assert!(chi_squared_gof(&s, &binom_pmf(), 2, 1.0).is_err());
        let pmf = Pmf::new(vec![0.3, 0.4, 0.3]).unwrap();
        assert!(chi_squared_gof(&s, &pmf, 3, 1.0).is_err());
        assert!(chi_squared_gof(&s, &pmf, 0, 0.0).is_err());
    }

    #[test]
    fn global_test_examples() {
        let zeros = vec![0.5; 100];
        let r = global_pvalue_test(&zeros, 0.05).unwrap();
        assert_eq!((r.n_below_alpha, r.p_value), (0, 1.0));

        let mut ps = vec![0.5; 95];
        ps.extend([0.01; 5]);
        let r = global_pvalue_test(&ps, 0.05).unwrap();
        assert_eq!(r.n_below_alpha, 5);
        // mpmath sum of the exact binomial terms
        assert!((r.p_value - 0.564_018_699_314_288_1).abs() < 1e-10);

        assert!(global_pvalue_test(&[], 0.05).is_err());
        assert!(global_pvalue_test(&[0.5], 1.0).is_err());
        assert!(global_pvalue_test(&[1.5], 0.05).is_err());
    }

    #[test]
    fn binomial_tail_both_branches() {
        assert_eq!(binomial_upper_tail(10, 0.3, 0), 1.0);
        assert_eq!(binomial_upper_tail(10, 0.3, 11), 0.0);
        assert!((binomial_upper_tail(10, 0.3, 10) - 0.3f64.powi(10)).abs() < 1e-18);
        // P(X >= 1) = 1 - 0.7^10
        assert!((binomial_upper_tail(10, 0.3, 1) - (1.0 - 0.7f64.powi(10))).abs() < 1e-14);
    }

    #[test]
    fn histogram() {
        assert_eq!(pvalue_histogram(&[0.1, 0.9], 2).unwrap(), vec![1, 1]);
        let h = pvalue_histogram(&[1.0], 10).unwrap();
        assert_eq!(h[9], 1);
        assert_eq!(pvalue_histogram(&[0.0, 0.5], 2).unwrap(), vec![1, 1]);
        assert!(pvalue_histogram(&[0.5], 1).is_err());
        assert!(pvalue_histogram(&[-0.1], 4).is_err());
    }
}
