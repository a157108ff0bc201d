//! Systematic sampling of recommendation batches. A policy row with
//! entries in [0,1] summing to N is consumed as N equally spaced
//! targets over one random phase, which yields exactly N distinct
//! items whose selection probabilities equal the row entries.

use rand::Rng;

use crate::error::{Error, Result};
use crate::policy::Policy;

/// Largest deviation of a row sum from N that is still rescaled
/// silently rather than rejected.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// A single policy row prepared for repeated batch draws.
#[derive(Debug, Clone)]
pub struct BatchDistribution {
    k: usize,
    n: usize,
    /// Item ids with nonzero weight, ascending.
    items: Vec<usize>,
    /// Cumulative rescaled weights over `items`; last entry is exactly N.
    cum: Vec<f64>,
}

impl BatchDistribution {
    /// Builds from a dense weight row. Entries must lie in [0, 1] and
    /// sum to `n` within ROW_SUM_TOL; the sum is then normalized to
    /// exactly `n` so every draw returns a full batch.
    pub fn from_row(row: &[f64], n: usize) -> Result<Self> {
        let k = row.len();
        if n == 0 || n >= k {
            return Err(Error::InvalidArgument(format!(
                "batch size must satisfy 1 <= N <= K-1, got N={n} K={k}"
            )));
        }
        let mut total = 0.0;
        for (j, &w) in row.iter().enumerate() {
            if !w.is_finite() || !(-1e-12..=1.0 + 1e-9).contains(&w) {
                return Err(Error::InvalidArgument(format!(
                    "weight {w} at position {j} is outside [0, 1]"
                )));
            }
            total += w.max(0.0);
        }
        if (total - n as f64).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {total}, expected {n}"
            )));
        }
        let scale = n as f64 / total;
        let mut items = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for (j, &w) in row.iter().enumerate() {
            if w > 0.0 {
                acc += w * scale;
                items.push(j);
                cum.push(acc);
            }
        }
        // Pin the final edge so the last target always lands inside.
        *cum.last_mut().expect("positive total") = n as f64;
        Ok(BatchDistribution { k, n, items, cum })
    }

    pub fn from_policy_row(policy: &Policy, i: usize) -> Result<Self> {
        Self::from_row(policy.row(i), policy.n())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Draws one batch: N distinct item ids, ascending.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.sample_with_phase(rng.random::<f64>())
    }

    /// Deterministic draw from a phase in [0, 1): targets are
    /// phase + 0, 1, ..., N-1 walked once through the cumulative row.
    /// Entries at most 1 keep consecutive targets in different items;
    /// the pointer still advances after each pick so a batch can never
    /// repeat an item.
    pub fn sample_with_phase(&self, phase: f64) -> Vec<usize> {
        debug_assert!((0.0..1.0).contains(&phase));
        let mut out = Vec::with_capacity(self.n);
        let mut j = 0usize;
        for t in 0..self.n {
            let target = phase + t as f64;
            while j < self.cum.len() - 1 && self.cum[j] <= target {
                j += 1;
            }
            out.push(self.items[j]);
            j += 1;
        }
        out
    }
}

/// Selection frequency of every item over `trials` draws.
pub fn empirical_marginals<R: Rng + ?Sized>(
    dist: &BatchDistribution,
    rng: &mut R,
    trials: usize,
) -> Vec<f64> {
    let mut counts = vec![0usize; dist.k()];
    for _ in 0..trials {
        for j in dist.sample(rng) {
            counts[j] += 1;
        }
    }
    counts
        .into_iter()
        .map(|c| c as f64 / trials as f64)
        .collect()
}
