use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sample::ScoreSample;

/// Probability vector over the scale `1..=M`; `probs[k - 1]` is P(U = k).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Wraps a probability vector after checking that it is one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a pmf needs at least 2 categories, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter("pmf entries must lie in [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("pmf sums to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    /// Point mass at category `k` (1-based).
    pub fn point_mass(k: u32, m: u32) -> Self {
        let mut probs = vec![0.0; m as usize];
        probs[k as usize - 1] = 1.0;
        Self { probs }
    }

    pub fn num_categories(&self) -> u32 {
        self.probs.len() as u32
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// P(U = k) for `k` in `1..=M`; zero outside the scale.
    pub fn prob(&self, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.probs.get(k as usize - 1).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = (i + 1) as f64 - mean;
                d * d * p
            })
            .sum()
    }

    /// Inverse-CDF draw of one category.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            cum += p;
            if u < cum {
                return i as u32 + 1;
            }
        }
        // Rounding left u above the accumulated total: fall back to the last
        // category that carries mass.
        self.probs
            .iter()
            .rposition(|&p| p > 0.0)
            .map_or(self.probs.len() as u32, |i| i as u32 + 1)
    }

    /// `n` iid draws from a generator seeded with `seed`.
    pub fn draw(&self, id: &str, n: usize, seed: u64) -> Result<ScoreSample> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores = (0..n).map(|_| self.sample(&mut rng)).collect();
        ScoreSample::new(id, scores, self.num_categories())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(Pmf::new(vec![0.5, 0.5]).is_ok());
        assert!(Pmf::new(vec![1.0]).is_err());
        assert!(Pmf::new(vec![0.7, 0.7]).is_err());
        assert!(Pmf::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn moments_and_lookup() {
        let pmf = Pmf::new(vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(pmf.mean(), 2.0);
        assert_eq!(pmf.variance(), 0.5);
        assert_eq!(pmf.prob(0), 0.0);
        assert_eq!(pmf.prob(4), 0.0);
        assert_eq!(pmf.prob(2), 0.5);
    }

    #[test]
    fn sampling_skips_empty_categories() {
        let pmf = Pmf::new(vec![0.0, 0.3, 0.0, 0.7, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let k = pmf.sample(&mut rng);
            assert!(k == 2 || k == 4);
        }
    }
}
