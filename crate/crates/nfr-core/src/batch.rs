//! Policy iteration over whole recommendation batches as atomic
//! actions. Improvement enumerates every feasible N-subset per state,
//! so one sweep costs binom(K-1, N) subset checks per state. This is
//! the route the per-item solver replaces; it exists to measure that
//! cost and to cross-check small catalogs.

use std::time::Instant;

use crate::comb::{binomial, next_combination};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::policy::Policy;
use crate::solver::{bellman_residual, evaluate_policy, ValueVector, IMPROVE_EPS};
use crate::user::UserModel;

#[derive(Debug, Clone, Copy)]
pub struct BatchMdpConfig {
    pub eval_tolerance: f64,
    pub max_iterations: usize,
    /// Refuse instances whose per-state subset count exceeds this.
    pub max_subsets: f64,
}

impl Default for BatchMdpConfig {
    fn default() -> Self {
        BatchMdpConfig {
            eval_tolerance: crate::solver::EVAL_TOL,
            max_iterations: 100,
            max_subsets: 2e6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchSolved {
    pub policy: Policy,
    pub values: ValueVector,
    pub report: BatchMdpReport,
}

#[derive(Debug, Clone)]
pub struct BatchMdpReport {
    pub iterations: usize,
    /// binom(K-1, N): subsets scanned per state per sweep.
    pub subsets_per_state: f64,
    /// Wall time of each improvement sweep, enumeration only.
    pub enumeration_seconds: Vec<f64>,
    pub bellman_residual: f64,
    pub converged: bool,
}

impl BatchMdpReport {
    pub fn mean_enumeration_seconds(&self) -> f64 {
        if self.enumeration_seconds.is_empty() {
            return f64::NAN;
        }
        self.enumeration_seconds.iter().sum::<f64>() / self.enumeration_seconds.len() as f64
    }
}

/// One enumeration sweep. For each state, scans subsets in
/// lexicographic order and keeps the first minimizer of the summed
/// weights among quality-feasible subsets, so output is deterministic.
/// Returns the chosen sets and their objective sums.
fn enumerate_sweep(
    instance: &Instance,
    user: &UserModel,
    weights: &[f64],
    thresholds: &[f64],
    others: &mut Vec<usize>,
    idx: &mut Vec<usize>,
) -> (Vec<Vec<usize>>, Vec<f64>) {
    let k = instance.k();
    let n = user.n;
    let mut sets = Vec::with_capacity(k);
    let mut objectives = Vec::with_capacity(k);
    for i in 0..k {
        others.clear();
        others.extend((0..k).filter(|&j| j != i));
        idx.clear();
        idx.extend(0..n);
        let u_row = instance.u_row(i);
        let threshold = thresholds[i] - 1e-9;
        let mut best = f64::INFINITY;
        let mut best_idx = idx.clone();
        loop {
            let mut w_sum = 0.0;
            let mut u_sum = 0.0;
            for &slot in idx.iter() {
                let j = others[slot];
                w_sum += weights[j];
                u_sum += u_row[j];
            }
            if u_sum >= threshold && w_sum < best {
                best = w_sum;
                best_idx.copy_from_slice(idx);
            }
            if !next_combination(idx, k - 1) {
                break;
            }
        }
        sets.push(best_idx.iter().map(|&slot| others[slot]).collect());
        objectives.push(best);
    }
    (sets, objectives)
}

/// Policy iteration with exhaustive subset improvement. Converges when
/// the chosen sets repeat, or when the values settle with a small
/// Bellman residual: states sharing cost and continuation have exactly
/// equal values, and such ties chatter between minimizers forever under
/// evaluation rounding without the settled exit. Timing in the report
/// covers enumeration only; evaluation cost is excluded so sweep times
/// scale with the subset count alone.
pub fn batch_policy_iteration(
    instance: &Instance,
    user: &UserModel,
    config: &BatchMdpConfig,
) -> Result<BatchSolved> {
    let k = instance.k();
    let n = user.n;
    if n >= k {
        return Err(Error::InvalidArgument(format!(
            "batch size {n} must be below catalog size {k}"
        )));
    }
    let subsets = binomial(k - 1, n);
    if subsets > config.max_subsets {
        return Err(Error::Refused(format!(
            "enumeration needs {subsets:.3e} subsets per state, cap is {:.3e}; \
             use the per-item solver instead",
            config.max_subsets
        )));
    }
    let thresholds: Vec<f64> = (0..k)
        .map(|i| Ok(user.q * instance.q_max(i, n)?))
        .collect::<Result<_>>()?;

    let mut others: Vec<usize> = Vec::with_capacity(k - 1);
    let mut idx: Vec<usize> = Vec::with_capacity(n);
    let mut timings = Vec::new();

    let t = Instant::now();
    let (mut sets, _) = enumerate_sweep(
        instance,
        user,
        instance.costs(),
        &thresholds,
        &mut others,
        &mut idx,
    );
    timings.push(t.elapsed().as_secs_f64());

    let mut prev_values: Option<ValueVector> = None;
    for round in 1..=config.max_iterations {
        let policy = Policy::from_sets(k, &sets, n);
        let values = evaluate_policy(instance, &policy, user, config.eval_tolerance)?;

        let t = Instant::now();
        let (next_sets, objectives) = enumerate_sweep(
            instance,
            user,
            values.as_slice(),
            &thresholds,
            &mut others,
            &mut idx,
        );
        timings.push(t.elapsed().as_secs_f64());

        let residual = bellman_residual(instance, user, values.as_slice(), &objectives);
        let settled = prev_values
            .as_ref()
            .is_some_and(|p| values.max_abs_diff(p) < IMPROVE_EPS);
        if next_sets == sets || (settled && residual <= 10.0 * IMPROVE_EPS) {
            return Ok(BatchSolved {
                policy,
                values,
                report: BatchMdpReport {
                    iterations: round,
                    subsets_per_state: subsets,
                    enumeration_seconds: timings,
                    bellman_residual: residual,
                    converged: true,
                },
            });
        }
        sets = next_sets;
        prev_values = Some(values);
    }
    Err(Error::NoConvergence {
        iterations: config.max_iterations,
        residual: f64::NAN,
    })
}
