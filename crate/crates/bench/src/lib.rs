//! Fixtures shared by the criterion benchmarks.

use gsd::{dist, GsdParams, ScoreSample};

/// A reproducible sample of `n` answers from the GSD at `(psi, rho)` on the
/// five-point scale.
pub fn gsd_sample(psi: f64, rho: f64, n: usize, seed: u64) -> ScoreSample {
    let params = GsdParams::new(psi, rho, 5).expect("fixture parameters are valid");
    dist::sample(&params, n, seed).expect("fixture sample size is positive")
}

/// Parameter pairs covering both regimes and the point-mass end.
pub fn parameter_grid() -> Vec<GsdParams> {
    [(2.85, 0.8), (2.6, 0.4), (1.3, 0.05), (4.5, 0.99), (3.0, 0.75), (5.0, 0.5)]
        .into_iter()
        .map(|(psi, rho)| GsdParams::new(psi, rho, 5).expect("fixture parameters are valid"))
        .collect()
}
