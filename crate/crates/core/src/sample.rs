use serde::Serialize;

use crate::error::{Error, Result};

/// The answers given to one scored item, each on the scale `1..=M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoreSample {
    id: String,
    scores: Vec<u32>,
    m: u32,
}

impl ScoreSample {
    pub fn new(id: impl Into<String>, scores: Vec<u32>, m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("scale needs M >= 2, got {m}")));
        }
        if scores.is_empty() {
            return Err(Error::InvalidParameter("sample is empty".into()));
        }
        if let Some(bad) = scores.iter().find(|&&s| s < 1 || s > m) {
            return Err(Error::InvalidParameter(format!("score {bad} outside 1..={m}")));
        }
        Ok(Self {
            id: id.into(),
            scores,
            m,
        })
    }

    /// Builds a sample holding `counts[k - 1]` copies of each category `k`.
    pub fn from_counts(id: impl Into<String>, counts: &[u64]) -> Result<Self> {
        let scores = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i as u32 + 1, c as usize))
            .collect();
        Self::new(id, scores, counts.len() as u32)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn scores(&self) -> &[u32] {
        &self.scores
    }

    pub fn num_categories(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Observed frequency of each category, indexed by `k - 1`.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.m as usize];
        for &s in &self.scores {
            counts[s as usize - 1] += 1;
        }
        counts
    }

    pub fn mean(&self) -> f64 {
        self.scores.iter().map(|&s| s as f64).sum::<f64>() / self.scores.len() as f64
    }

    /// Variance with divisor `n`.
    pub fn population_variance(&self) -> f64 {
        let mean = self.mean();
        self.scores
            .iter()
            .map(|&s| (s as f64 - mean).powi(2))
            .sum::<f64>()
            / self.scores.len() as f64
    }

    /// Variance with divisor `n - 1`; zero for a single observation.
    pub fn sample_variance(&self) -> f64 {
        let n = self.scores.len();
        if n < 2 {
            return 0.0;
        }
        self.population_variance() * n as f64 / (n - 1) as f64
    }

    /// `Some(k)` when every answer equals `k`.
    pub fn constant_value(&self) -> Option<u32> {
        let first = self.scores[0];
        self.scores.iter().all(|&s| s == first).then_some(first)
    }
}
