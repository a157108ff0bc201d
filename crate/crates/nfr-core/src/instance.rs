//! Problem instance: content relevance, retrieval costs, catalog
//! distribution and the cached subset.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::policy::Policy;
use crate::user::{ClickModel, CuriousClick, UserModel};

/// Tolerance on the catalog distribution summing to one.
pub const P0_SUM_TOL: f64 = 1e-12;
/// Tolerance on transition matrix rows summing to one.
pub const TRANSITION_ROW_TOL: f64 = 1e-12;

/// A catalog of K items with pairwise relevance, per-item retrieval
/// costs, a catalog sampling distribution and a cached subset.
#[derive(Debug, Clone)]
pub struct Instance {
    k: usize,
    u: DenseMatrix,
    costs: Vec<f64>,
    p0: Vec<f64>,
    cached: Vec<usize>,
    is_cached: Vec<bool>,
    /// Per-row indices j with u_ij > 0, ascending. Kept because real
    /// relevance matrices are sparse (mean out-degree far below K).
    related: Vec<Vec<usize>>,
}

impl Instance {
    /// Validates and builds an instance.
    ///
    /// Requirements: `u` is square with entries in [0,1] and a zero
    /// diagonal; `p0` has strictly positive entries summing to one
    /// within 1e-12 (ergodicity of the no-click jump); costs are
    /// non-negative and finite; every cached item costs no more than
    /// every uncached item.
    pub fn new(
        u: DenseMatrix,
        costs: Vec<f64>,
        p0: Vec<f64>,
        cached: Vec<usize>,
    ) -> Result<Self> {
        let k = u.rows();
        if u.cols() != k {
            return Err(Error::InvalidArgument(format!(
                "relevance matrix must be square, got {}x{}",
                u.rows(),
                u.cols()
            )));
        }
        if k < 2 {
            return Err(Error::InvalidArgument(
                "an instance needs at least two items".into(),
            ));
        }
        if costs.len() != k || p0.len() != k {
            return Err(Error::InvalidArgument(format!(
                "costs ({}) and p0 ({}) must have length K={k}",
                costs.len(),
                p0.len()
            )));
        }
        for i in 0..k {
            let row = u.row(i);
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "u[{i}][{j}] = {v} outside [0,1]"
                    )));
                }
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "u[{i}][{i}] = {} but the diagonal must be zero",
                    row[i]
                )));
            }
        }
        let p0_sum: f64 = p0.iter().sum();
        if (p0_sum - 1.0).abs() > P0_SUM_TOL {
            return Err(Error::InvalidArgument(format!(
                "p0 sums to {p0_sum}, expected 1 within {P0_SUM_TOL:e}"
            )));
        }
        if let Some((i, &v)) = p0.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "p0[{i}] = {v}; every entry must be strictly positive"
            )));
        }
        if let Some((i, &c)) = costs
            .iter()
            .enumerate()
            .find(|(_, &c)| !(c >= 0.0) || !c.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "cost[{i}] = {c}; costs must be finite and non-negative"
            )));
        }

        let mut cached = cached;
        cached.sort_unstable();
        cached.dedup();
        if let Some(&bad) = cached.iter().find(|&&i| i >= k) {
            return Err(Error::InvalidArgument(format!(
                "cached index {bad} out of range for K={k}"
            )));
        }
        let mut is_cached = vec![false; k];
        for &i in &cached {
            is_cached[i] = true;
        }
        if !cached.is_empty() && cached.len() < k {
            let max_cached = cached
                .iter()
                .map(|&i| costs[i])
                .fold(f64::NEG_INFINITY, f64::max);
            let min_uncached = (0..k)
                .filter(|&i| !is_cached[i])
                .map(|i| costs[i])
                .fold(f64::INFINITY, f64::min);
            if max_cached > min_uncached {
                return Err(Error::InvalidArgument(format!(
                    "cached item cost {max_cached} exceeds uncached cost {min_uncached}"
                )));
            }
        }

        let related = (0..k)
            .map(|i| {
                u.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();

        Ok(Instance {
            k,
            u,
            costs,
            p0,
            cached,
            is_cached,
            related,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn u(&self, i: usize, j: usize) -> f64 {
        self.u.get(i, j)
    }

    #[inline]
    pub fn u_row(&self, i: usize) -> &[f64] {
        self.u.row(i)
    }

    pub fn u_matrix(&self) -> &DenseMatrix {
        &self.u
    }

    #[inline]
    pub fn cost(&self, i: usize) -> f64 {
        self.costs[i]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    pub fn cached_ids(&self) -> &[usize] {
        &self.cached
    }

    #[inline]
    pub fn is_cached(&self, i: usize) -> bool {
        self.is_cached[i]
    }

    /// Indices related to `i` (u_ij > 0), ascending.
    pub fn related(&self, i: usize) -> &[usize] {
        &self.related[i]
    }

    /// The N most relevant items to `i`, self excluded. Ties in
    /// relevance are broken toward the cheaper item, then the lower
    /// index, so the selection is deterministic.
    pub fn top_n_set(&self, i: usize, n: usize) -> Result<Vec<usize>> {
        if n == 0 || n > self.k - 1 {
            return Err(Error::InvalidArgument(format!(
                "batch size {n} outside 1..=K-1 ({})",
                self.k - 1
            )));
        }
        let row = self.u.row(i);
        let mut order: Vec<usize> = (0..self.k).filter(|&j| j != i).collect();
        order.sort_unstable_by(|&a, &b| {
            row[b]
                .partial_cmp(&row[a])
                .unwrap()
                .then(self.costs[a].partial_cmp(&self.costs[b]).unwrap())
                .then(a.cmp(&b))
        });
        order.truncate(n);
        Ok(order)
    }

    /// Best achievable batch relevance mass for state `i`:
    /// Q_i^max(N) = sum of the N largest u_ij.
    pub fn q_max(&self, i: usize, n: usize) -> Result<f64> {
        Ok(self.top_n_set(i, n)?.iter().map(|&j| self.u(i, j)).sum())
    }

    /// Normalized quality of a concrete batch `w` shown at state `i`:
    /// sum of u_ij over w divided by Q_i^max(|w|). A state with
    /// Q_i^max = 0 has nothing relevant to show, so every batch is
    /// graded 1.0 there.
    pub fn batch_quality(&self, i: usize, w: &[usize]) -> Result<f64> {
        debug_assert!(w.iter().all(|&j| j != i), "batch must exclude the viewed item");
        let q_max = self.q_max(i, w.len())?;
        if q_max == 0.0 {
            log::debug!("state {i} has no related items; batch quality pinned to 1.0");
            return Ok(1.0);
        }
        let mass: f64 = w.iter().map(|&j| self.u(i, j)).sum();
        Ok(mass / q_max)
    }

    /// Builds the dense session transition kernel for `policy` under the
    /// uniform-attention click rule.
    pub fn transition_matrix(&self, policy: &Policy, user: &UserModel) -> Result<DenseMatrix> {
        self.transition_matrix_with(policy, &CuriousClick::from(user))
    }

    /// Transition kernel with a pluggable click rule:
    /// P_ij = a_ij r_ij + (1 - sum_l a_il r_il) p0_j, where a_ij is the
    /// click weight. Every row must come out a probability distribution
    /// within 1e-12; anything else is reported as an inconsistency.
    pub fn transition_matrix_with(
        &self,
        policy: &Policy,
        click: &impl ClickModel,
    ) -> Result<DenseMatrix> {
        if policy.k() != self.k {
            return Err(Error::InvalidArgument(format!(
                "policy is over {} items, instance has {}",
                policy.k(),
                self.k
            )));
        }
        let mut p = DenseMatrix::zeros(self.k, self.k);
        for i in 0..self.k {
            let r_row = policy.row(i);
            let u_row = self.u.row(i);
            let mut click_mass = 0.0;
            {
                let out = p.row_mut(i);
                for j in 0..self.k {
                    if r_row[j] != 0.0 {
                        let w = click.click_weight(i, j, u_row, r_row) * r_row[j];
                        out[j] = w;
                        click_mass += w;
                    }
                }
            }
            if click_mass > 1.0 + TRANSITION_ROW_TOL {
                return Err(Error::Inconsistent(format!(
                    "row {i}: click mass {click_mass} exceeds 1"
                )));
            }
            let jump = 1.0 - click_mass;
            let out = p.row_mut(i);
            for j in 0..self.k {
                out[j] += jump * self.p0[j];
            }
            let sum: f64 = out.iter().sum();
            if (sum - 1.0).abs() > TRANSITION_ROW_TOL {
                return Err(Error::Inconsistent(format!(
                    "row {i} of the transition matrix sums to {sum}"
                )));
            }
        }
        Ok(p)
    }
}

/// Uniform catalog distribution over `k` items.
pub fn uniform_p0(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}
