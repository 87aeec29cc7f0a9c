use gsd::dist::{self, GsdParams};
use gsd::gof::{binomial_upper_tail, chi_squared_gof, global_pvalue_test, pvalue_histogram};
use gsd::report::fit_and_test;
use gsd::{BatchConfig, Error, Model, Pmf, ScoreSample};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn binomial_pmf() -> Pmf {
    Pmf::new([1.0, 4.0, 6.0, 4.0, 1.0].map(|x| x / 16.0).to_vec()).unwrap()
}

#[test]
fn hand_computed_statistic() {
    let s = ScoreSample::from_counts("a", &[20, 30, 60, 40, 10]).unwrap();
    let r = chi_squared_gof(&s, &binomial_pmf(), 2, 1.0).unwrap();
    assert!((r.statistic - 12.5).abs() < 1e-12);
    assert_eq!(r.df, 2);
    assert!((r.p_value - 0.001_930_454_136_227_709_3).abs() < 1e-12);

    let s = ScoreSample::from_counts("b", &[10, 40, 60, 40, 10]).unwrap();
    let r = chi_squared_gof(&s, &binomial_pmf(), 2, 1.0).unwrap();
    assert_eq!(r.statistic, 0.0);
    assert_eq!(r.p_value, 1.0);
}

#[test]
fn point_mass_is_untestable() {
    let s = ScoreSample::new("c", vec![3; 20], 5).unwrap();
    let err = chi_squared_gof(&s, &Pmf::point_mass(3, 5), 2, 1.0).unwrap_err();
    assert!(matches!(err, Error::Untestable { .. }));
}

#[test]
fn calibrated_under_the_model_and_powerful_against_normal() {
    let config = BatchConfig::default();
    let truth = GsdParams::new(2.85, 0.8, 5).unwrap();
    let mut gsd = Vec::new();
    let mut normal = Vec::new();
    for i in 0..400u64 {
        let s = dist::sample(&truth, 24, 70_000 + i).unwrap();
        gsd.extend(fit_and_test(&s, Model::Gsd, &config).unwrap().p_value);
        normal.extend(fit_and_test(&s, Model::Normal, &config).unwrap().p_value);
    }
    let frac = |p: &[f64]| p.iter().filter(|&&x| x < 0.05).count() as f64 / p.len() as f64;
    assert!(frac(&gsd) <= 0.08, "{}", frac(&gsd));
    assert!(frac(&normal) > frac(&gsd), "{} vs {}", frac(&normal), frac(&gsd));
}

#[test]
fn global_test_examples() {
    let r = global_pvalue_test(&[0.5; 100], 0.05).unwrap();
    assert_eq!((r.n_tests, r.n_below_alpha, r.p_value), (100, 0, 1.0));
    assert!((binomial_upper_tail(100, 0.05, 5) - 0.564_018_699_314_288_1).abs() < 1e-10);
    assert!(global_pvalue_test(&[], 0.05).is_err());
    assert!(global_pvalue_test(&[0.5], 1.0).is_err());
    let big = binomial_upper_tail(1_000_000, 0.05, 51_000);
    assert!(big > 0.0 && big < 1e-5);
}

#[test]
fn histogram_examples() {
    assert_eq!(pvalue_histogram(&[0.1, 0.9], 2).unwrap(), vec![1, 1]);
    assert_eq!(pvalue_histogram(&[1.0], 10).unwrap()[9], 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
    let counts = pvalue_histogram(&draws, 20).unwrap();
    let slack = 5.0 * (500.0f64 * 0.95).sqrt();
    assert!(counts.iter().all(|&c| (c as f64 - 500.0).abs() <= slack), "{counts:?}");
    assert_eq!(counts.iter().sum::<u64>(), 10_000);
}

proptest! {
    #[test]
    fn gof_result_invariants(
        psi in 1.2f64..4.8,
        rho in 0.05f64..0.95,
        n in 5usize..200,
        seed in any::<u64>(),
    ) {
        let truth = GsdParams::new(psi, rho, 5).unwrap();
        let s = dist::sample(&truth, n, seed).unwrap();
        match chi_squared_gof(&s, &dist::pmf(&truth), 0, 1.0) {
            Ok(r) => {
                prop_assert!((r.expected.iter().sum::<f64>() - n as f64).abs() < 1e-9);
                prop_assert_eq!(r.observed.iter().sum::<u64>(), n as u64);
                prop_assert!(r.df >= 1);
                prop_assert!(r.statistic >= 0.0);
                prop_assert!((0.0..=1.0).contains(&r.p_value));
                prop_assert!(r.expected.iter().all(|&e| e >= 1.0));
                prop_assert_eq!(r.merged_cells.first().unwrap().first, 1);
                prop_assert_eq!(r.merged_cells.last().unwrap().last, 5);
                for w in r.merged_cells.windows(2) {
                    prop_assert_eq!(w[1].first, w[0].last + 1);
                }
            }
            Err(e) => prop_assert!(matches!(e, Error::Untestable { .. }), "{}", e),
        }
    }

    #[test]
    fn upper_tail_is_monotone(n in 1u64..400, p in 0.001f64..0.999) {
        let mut prev = 1.0 + 1e-15;
        for x in 0..=n {
            let t = binomial_upper_tail(n, p, x);
            prop_assert!(t <= prev && (0.0..=1.0).contains(&t));
            prev = t;
        }
    }
}
