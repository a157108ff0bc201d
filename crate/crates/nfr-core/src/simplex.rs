//! Reference LP solvers for the per-state inner problem, used in tests
//! and cross-checks. Both routes here are deliberately independent of
//! the production path in `inner`: one is a generic bounded-variable
//! simplex, the other exhaustive vertex enumeration for tiny catalogs.

use crate::comb::next_combination;
use crate::error::{Error, Result};
use crate::inner::{InnerProblem, InnerSolution};

/// Dual feasibility threshold for reduced costs.
const DUAL_EPS: f64 = 1e-10;
/// Primal tolerance for ratio tests and bound snapping.
const PRIMAL_EPS: f64 = 1e-12;

/// Solves the inner problem
///   min sum_j v_j r_j
///   s.t. sum_j r_j = N, sum_j u_j r_j >= qhat, 0 <= r_j <= 1, r_f = 0
/// with a two-row bounded-variable simplex under Bland's rule.
pub fn simplex_oracle(p: &InnerProblem) -> Result<InnerSolution> {
    p.check()?;
    let cap = 200 * (p.weights.len() + 2);
    simplex_with_pivot_cap(p, cap)
}

/// Same solver with an explicit pivot budget; exceeding it is reported
/// as non-convergence (anti-cycling contract).
pub fn simplex_with_pivot_cap(p: &InnerProblem, max_pivots: usize) -> Result<InnerSolution> {
    p.check()?;
    let k = p.weights.len();
    let n = p.n as f64;

    // Feasibility: the best achievable relevance mass.
    let achievable = {
        let mut u: Vec<f64> = (0..k)
            .filter(|&j| j != p.forbidden)
            .map(|j| p.relevance[j])
            .collect();
        u.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        u[..p.n].iter().sum::<f64>()
    };
    if p.quality_threshold > achievable + 1e-9 {
        return Err(Error::Infeasible {
            required: p.quality_threshold,
            achievable,
        });
    }

    // Variables 0..k are the r_j (the forbidden one clamped to [0,0]);
    // variable k is the quality surplus s with column (0, -1).
    let s_var = k;
    let col = |j: usize| -> [f64; 2] {
        if j == s_var {
            [0.0, -1.0]
        } else {
            [1.0, p.relevance[j]]
        }
    };
    let cost = |j: usize| -> f64 {
        if j == s_var {
            0.0
        } else {
            p.weights[j]
        }
    };
    let mut upper = vec![1.0; k + 1];
    upper[p.forbidden] = 0.0;
    upper[s_var] = f64::INFINITY;
    let b = [n, p.quality_threshold];

    // Warm start: top-N relevance items at their upper bound, one of
    // them moved into the basis next to the surplus variable.
    let mut order: Vec<usize> = (0..k).filter(|&j| j != p.forbidden).collect();
    order.sort_unstable_by(|&a, &b| {
        p.relevance[b]
            .partial_cmp(&p.relevance[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut at_upper = vec![false; k + 1];
    for &j in &order[..p.n] {
        at_upper[j] = true;
    }
    let pivot_col = order[0];
    at_upper[pivot_col] = false;
    let mut basis = [pivot_col, s_var];
    let mut in_basis = vec![false; k + 1];
    in_basis[pivot_col] = true;
    in_basis[s_var] = true;

    let mut pivots = 0usize;
    loop {
        // Basis matrix, determinant and inverse.
        let c0 = col(basis[0]);
        let c1 = col(basis[1]);
        let det = c0[0] * c1[1] - c1[0] * c0[1];
        if det.abs() < 1e-300 {
            return Err(Error::Inconsistent("singular simplex basis".into()));
        }
        let binv = [
            [c1[1] / det, -c1[0] / det],
            [-c0[1] / det, c0[0] / det],
        ];

        // Effective right-hand side after nonbasic-at-upper contributions.
        let mut rhs = b;
        for j in 0..=s_var {
            if !in_basis[j] && at_upper[j] && upper[j] != 0.0 {
                let a = col(j);
                rhs[0] -= a[0] * upper[j];
                rhs[1] -= a[1] * upper[j];
            }
        }
        let xb = [
            binv[0][0] * rhs[0] + binv[0][1] * rhs[1],
            binv[1][0] * rhs[0] + binv[1][1] * rhs[1],
        ];

        // Duals and the Bland entering choice.
        let cb = [cost(basis[0]), cost(basis[1])];
        let y = [
            binv[0][0] * cb[0] + binv[1][0] * cb[1],
            binv[0][1] * cb[0] + binv[1][1] * cb[1],
        ];
        let mut entering = None;
        for j in 0..=s_var {
            if in_basis[j] || upper[j] == 0.0 {
                continue;
            }
            let a = col(j);
            let d = cost(j) - y[0] * a[0] - y[1] * a[1];
            if !at_upper[j] && d < -DUAL_EPS {
                entering = Some((j, true));
                break;
            }
            if at_upper[j] && d > DUAL_EPS {
                entering = Some((j, false));
                break;
            }
        }
        let Some((e, increasing)) = entering else {
            // Optimal: reassemble the full solution.
            let mut x = vec![0.0; k + 1];
            for j in 0..=s_var {
                if !in_basis[j] && at_upper[j] {
                    x[j] = upper[j];
                }
            }
            x[basis[0]] = xb[0];
            x[basis[1]] = xb[1];
            let r: Vec<f64> = x[..k].to_vec();
            let objective = r.iter().zip(p.weights).map(|(&r, &v)| r * v).sum();
            let mass: f64 = r.iter().zip(p.relevance).map(|(&r, &u)| r * u).sum();
            let fractional = r
                .iter()
                .filter(|&&v| v > PRIMAL_EPS && v < 1.0 - PRIMAL_EPS)
                .count();
            return Ok(InnerSolution {
                r,
                objective,
                quality_slack: mass - p.quality_threshold,
                fractional,
            });
        };

        // Direction of basic variables as the entering one moves by t.
        let a_e = col(e);
        let w = [
            binv[0][0] * a_e[0] + binv[0][1] * a_e[1],
            binv[1][0] * a_e[0] + binv[1][1] * a_e[1],
        ];
        // increasing: x_B(t) = x_B - t w; decreasing: x_B(t) = x_B + t w.
        let sign = if increasing { 1.0 } else { -1.0 };
        let mut t_max = upper[e]; // bound flip distance (inf for s)
        let mut leaving: Option<(usize, bool)> = None; // (basis slot, leaves at upper)
        for slot in 0..2 {
            let delta = sign * w[slot];
            let (lo_room, hi_room) = (
                xb[slot] - 0.0,
                upper[basis[slot]] - xb[slot],
            );
            let (room, hits_upper) = if delta > PRIMAL_EPS {
                (lo_room / delta, false)
            } else if delta < -PRIMAL_EPS {
                (hi_room / -delta, true)
            } else {
                continue;
            };
            let room = room.max(0.0);
            if room < t_max - PRIMAL_EPS
                || (room < t_max + PRIMAL_EPS
                    && leaving.is_some_and(|(s, _)| basis[s] > basis[slot]))
            {
                t_max = room;
                leaving = Some((slot, hits_upper));
            }
        }
        if t_max.is_infinite() {
            return Err(Error::Inconsistent("unbounded inner LP".into()));
        }

        match leaving {
            None => {
                // Bound flip: the entering variable runs across its range.
                at_upper[e] = !at_upper[e];
            }
            Some((slot, hits_upper)) => {
                let out = basis[slot];
                in_basis[out] = false;
                at_upper[out] = hits_upper;
                in_basis[e] = true;
                at_upper[e] = false;
                basis[slot] = e;
            }
        }
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::NoConvergence {
                iterations: pivots,
                residual: f64::NAN,
            });
        }
    }
}

/// Exhaustive vertex enumeration for catalogs with K <= 12: every basic
/// solution is either a binary N-subset or an (N-1)-subset plus a
/// fractional pair that makes the quality constraint tight.
pub fn enumerate_oracle(p: &InnerProblem) -> Result<InnerSolution> {
    p.check()?;
    let k = p.weights.len();
    if k > 12 {
        return Err(Error::InvalidArgument(format!(
            "enumeration oracle is limited to K <= 12, got {k}"
        )));
    }
    let candidates: Vec<usize> = (0..k).filter(|&j| j != p.forbidden).collect();
    let m = candidates.len();
    let qhat = p.quality_threshold;
    let mut best: Option<InnerSolution> = None;
    let mut consider = |r: Vec<f64>| {
        let objective: f64 = r.iter().zip(p.weights).map(|(&r, &v)| r * v).sum();
        let mass: f64 = r.iter().zip(p.relevance).map(|(&r, &u)| r * u).sum();
        if mass < qhat - 1e-12 {
            return;
        }
        if best.as_ref().is_none_or(|b| objective < b.objective) {
            let fractional = r
                .iter()
                .filter(|&&v| v > PRIMAL_EPS && v < 1.0 - PRIMAL_EPS)
                .count();
            best = Some(InnerSolution {
                r,
                objective,
                quality_slack: mass - qhat,
                fractional,
            });
        }
    };

    // Binary N-subsets.
    let mut idx: Vec<usize> = (0..p.n).collect();
    loop {
        let mut r = vec![0.0; k];
        for &c in &idx {
            r[candidates[c]] = 1.0;
        }
        consider(r);
        if !next_combination(&mut idx, m) {
            break;
        }
    }

    // A fractional pair (a, b) with the quality constraint tight, plus
    // N-1 items at one.
    for ai in 0..m {
        for bi in ai + 1..m {
            let (a, b) = (candidates[ai], candidates[bi]);
            if (p.relevance[a] - p.relevance[b]).abs() < 1e-14 {
                continue;
            }
            let rest: Vec<usize> = candidates
                .iter()
                .copied()
                .filter(|&j| j != a && j != b)
                .collect();
            if rest.len() < p.n - 1 {
                continue;
            }
            let mut sel: Vec<usize> = (0..p.n - 1).collect();
            loop {
                let ones_mass: f64 = sel.iter().map(|&c| p.relevance[rest[c]]).sum();
                let x = (qhat - ones_mass - p.relevance[a])
                    / (p.relevance[b] - p.relevance[a]);
                if x > PRIMAL_EPS && x < 1.0 - PRIMAL_EPS {
                    let mut r = vec![0.0; k];
                    for &c in &sel {
                        r[rest[c]] = 1.0;
                    }
                    r[a] = 1.0 - x;
                    r[b] = x;
                    consider(r);
                }
                if !next_combination(&mut sel, rest.len()) {
                    break;
                }
            }
        }
    }

    best.ok_or(Error::Infeasible {
        required: qhat,
        achievable: {
            let mut u: Vec<f64> = candidates.iter().map(|&j| p.relevance[j]).collect();
            u.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
            u[..p.n].iter().sum()
        },
    })
}
