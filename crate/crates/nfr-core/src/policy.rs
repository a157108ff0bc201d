//! Recommendation policies: per-state batch frequency rows.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::matrix::DenseMatrix;

/// Tolerance for policy feasibility checks.
pub const POLICY_TOL: f64 = 1e-9;

/// A stationary recommendation policy. Row i holds the per-item batch
/// frequencies r_ij: the probability that item j occupies a slot of the
/// N-item batch shown at state i. Feasible rows satisfy r_ii = 0,
/// 0 <= r_ij <= 1 and sum_j r_ij = N.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    r: DenseMatrix,
    n: usize,
}

impl Policy {
    pub fn from_matrix(r: DenseMatrix, n: usize) -> Self {
        assert_eq!(r.rows(), r.cols(), "policy matrix must be square");
        Policy { r, n }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, n: usize) -> Self {
        Policy::from_matrix(DenseMatrix::from_rows(rows), n)
    }

    /// Deterministic policy placing weight 1.0 on each member of the
    /// given per-state sets. Every set must hold exactly `n` items.
    pub fn from_sets(k: usize, sets: &[Vec<usize>], n: usize) -> Self {
        assert_eq!(sets.len(), k);
        let mut r = DenseMatrix::zeros(k, k);
        for (i, set) in sets.iter().enumerate() {
            assert_eq!(set.len(), n, "state {i}: set size != n");
            for &j in set {
                r.set(i, j, 1.0);
            }
        }
        Policy { r, n }
    }

    pub fn k(&self) -> usize {
        self.r.rows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.r.row(i)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.r
    }

    /// Nonzero entries of row i as (index, weight), ascending index.
    pub fn sparse_row(&self, i: usize) -> Vec<(usize, f64)> {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, &v)| (j, v))
            .collect()
    }

    /// Checks feasibility against an instance and a quality floor q.
    pub fn validate(&self, instance: &Instance, q: f64) -> Result<ValidationReport> {
        if self.k() != instance.k() {
            return Err(Error::InvalidArgument(format!(
                "policy is over {} items, instance has {}",
                self.k(),
                instance.k()
            )));
        }
        let n = self.n;
        let mut rows = Vec::with_capacity(self.k());
        for i in 0..self.k() {
            let row = self.row(i);
            let u_row = instance.u_row(i);
            let sum: f64 = row.iter().sum();
            let mut box_violation = 0.0f64;
            for &v in row {
                box_violation = box_violation.max(-v).max(v - 1.0);
            }
            let mass: f64 = row
                .iter()
                .zip(u_row)
                .map(|(&r, &u)| r * u)
                .sum();
            let threshold = q * instance.q_max(i, n)?;
            rows.push(RowCheck {
                budget_error: (sum - n as f64).abs(),
                box_violation: box_violation.max(0.0),
                self_weight: row[i].abs(),
                quality_deficit: (threshold - mass).max(0.0),
            });
        }
        Ok(ValidationReport { rows })
    }
}

/// Per-row feasibility numbers, all zero for an exactly feasible row.
#[derive(Debug, Clone, Copy)]
pub struct RowCheck {
    /// |sum_j r_ij - N|
    pub budget_error: f64,
    /// max_j of how far r_ij leaves [0,1]
    pub box_violation: f64,
    /// |r_ii|
    pub self_weight: f64,
    /// max(0, q * Qmax_i - sum_j r_ij u_ij)
    pub quality_deficit: f64,
}

impl RowCheck {
    pub fn pass(&self) -> bool {
        self.budget_error <= POLICY_TOL
            && self.box_violation <= POLICY_TOL
            && self.self_weight <= POLICY_TOL
            && self.quality_deficit <= POLICY_TOL
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub rows: Vec<RowCheck>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(RowCheck::pass)
    }

    /// Index and check of the row with the largest violation, if any row fails.
    pub fn worst_row(&self) -> Option<(usize, RowCheck)> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.pass())
            .max_by(|(_, a), (_, b)| {
                let va = a.budget_error + a.box_violation + a.self_weight + a.quality_deficit;
                let vb = b.budget_error + b.box_violation + b.self_weight + b.quality_deficit;
                va.partial_cmp(&vb).unwrap()
            })
            .map(|(i, c)| (i, *c))
    }
}
