//! Per-state inner problem: distribute N slots of batch frequency over
//! the catalog, minimizing a weight sum subject to the quality floor.
//!
//! The production route scalarizes the quality constraint with a
//! multiplier mu, exploiting that for fixed mu the optimum is the set
//! of N smallest scores s_j(mu) = v_j - mu u_j. A bisection on mu finds
//! the constraint boundary; one exact exchange step afterwards restores
//! a basic solution with at most two fractional coordinates and the
//! quality constraint tight to machine precision.

use crate::error::{Error, Result};
use std::cmp::Ordering;

/// Quality residual below which a bisection probe is accepted as tight.
const BISECT_RESIDUAL: f64 = 1e-10;
/// Bisection iteration budget before the exchange repair.
const BISECT_MAX_ITERS: usize = 200;
/// Coordinates closer than this to a bound count as integral.
const FRACTION_EPS: f64 = 1e-12;
/// Slot counts up to this bound are selected by a bounded-insertion scan
/// whose cost is flat in n; larger batches fall back to a quickselect.
/// Both pick the same set: the score order is strict.
const SCAN_SELECT_MAX_N: usize = 32;

/// One per-state subproblem over K items.
///
/// `weights` are the minimization weights (value estimates or immediate
/// costs), `relevance` the u-row of the viewed item, `forbidden` the
/// viewed item itself, and `quality_threshold` the absolute relevance
/// mass the batch must reach (q * Qmax of the row).
#[derive(Debug, Clone, Copy)]
pub struct InnerProblem<'a> {
    pub weights: &'a [f64],
    pub relevance: &'a [f64],
    pub forbidden: usize,
    pub n: usize,
    pub quality_threshold: f64,
}

impl InnerProblem<'_> {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn check(&self) -> Result<()> {
        let k = self.k();
        if self.relevance.len() != k {
            return Err(Error::InvalidArgument(format!(
                "weights ({k}) and relevance ({}) lengths differ",
                self.relevance.len()
            )));
        }
        if self.forbidden >= k {
            return Err(Error::InvalidArgument(format!(
                "forbidden index {} out of range for K={k}",
                self.forbidden
            )));
        }
        if self.n == 0 || self.n > k - 1 {
            return Err(Error::InvalidArgument(format!(
                "slot count {} outside 1..=K-1 ({})",
                self.n,
                k - 1
            )));
        }
        if !self.quality_threshold.is_finite() {
            return Err(Error::InvalidArgument(
                "quality threshold must be finite".into(),
            ));
        }
        if self.weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        if self
            .relevance
            .iter()
            .any(|u| !u.is_finite() || !(0.0..=1.0).contains(u))
        {
            return Err(Error::InvalidArgument(
                "relevance entries must lie in [0,1]".into(),
            ));
        }
        Ok(())
    }
}

/// A solved inner problem: the frequency row, its weight objective, the
/// slack of the quality constraint and the number of fractional
/// coordinates (at most 2 at a basic optimum).
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub r: Vec<f64>,
    pub objective: f64,
    pub quality_slack: f64,
    pub fractional: usize,
}

/// Strict order on (score, relevance, index) candidates. The index tail
/// makes every comparison decisive, so the n-smallest set is unique.
fn candidate_cmp(a: &(f64, f64, usize), b: &(f64, f64, usize)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap()
        .then(a.1.partial_cmp(&b.1).unwrap())
        .then(a.2.cmp(&b.2))
}

/// Reusable buffers for the repeated n-smallest-score selections of the
/// multiplier search.
struct BatchSelector {
    keep: Vec<(f64, f64, usize)>,
    all: Vec<(f64, f64, usize)>,
}

impl BatchSelector {
    fn new() -> Self {
        BatchSelector {
            keep: Vec::new(),
            all: Vec::new(),
        }
    }

    /// Greedy minimizer of the scalarized objective at multiplier mu: the
    /// n smallest scores s_j = w_j - mu u_j win a full slot each. Returns
    /// the relevance mass of the winners; `set` reads the winners back.
    fn probe(&mut self, p: &InnerProblem, mu: f64) -> f64 {
        self.keep.clear();
        if p.n <= SCAN_SELECT_MAX_N {
            // keep stays sorted ascending with the worst keeper last, so
            // the common case is one comparison and no insertion.
            for j in 0..p.k() {
                if j == p.forbidden {
                    continue;
                }
                let cand = (p.weights[j] - mu * p.relevance[j], p.relevance[j], j);
                if self.keep.len() == p.n {
                    if candidate_cmp(&cand, &self.keep[p.n - 1]) != Ordering::Less {
                        continue;
                    }
                    self.keep.pop();
                }
                let pos = self
                    .keep
                    .partition_point(|e| candidate_cmp(e, &cand) == Ordering::Less);
                self.keep.insert(pos, cand);
            }
        } else {
            self.all.clear();
            self.all.extend(
                (0..p.k())
                    .filter(|&j| j != p.forbidden)
                    .map(|j| (p.weights[j] - mu * p.relevance[j], p.relevance[j], j)),
            );
            self.all.select_nth_unstable_by(p.n - 1, candidate_cmp);
            self.keep.extend_from_slice(&self.all[..p.n]);
        }
        self.keep.iter().map(|e| e.1).sum()
    }

    fn set(&self) -> Vec<usize> {
        self.keep.iter().map(|e| e.2).collect()
    }
}

/// Solves the inner problem. Deterministic: score ties are broken by
/// lower relevance, then lower index.
pub fn solve_inner(p: &InnerProblem) -> Result<InnerSolution> {
    p.check()?;
    let k = p.k();
    let qhat = p.quality_threshold;

    // Best achievable relevance mass and the items that realize it.
    let mut by_relevance: Vec<usize> = (0..k).filter(|&j| j != p.forbidden).collect();
    by_relevance.sort_unstable_by(|&a, &b| {
        p.relevance[b]
            .partial_cmp(&p.relevance[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let qmax: f64 = by_relevance[..p.n].iter().map(|&j| p.relevance[j]).sum();
    if qhat > qmax + 1e-9 {
        return Err(Error::Infeasible {
            required: qhat,
            achievable: qmax,
        });
    }
    // Threshold at the achievable maximum: the constraint admits only
    // relevance maximizers, so the top-N set is optimal outright.
    if qmax > 0.0 && qhat > 0.0 && qhat >= qmax * (1.0 - 1e-12) {
        return Ok(build_solution(p, &by_relevance[..p.n], None));
    }

    let mut sel = BatchSelector::new();

    let g0 = sel.probe(p, 0.0);
    if g0 >= qhat {
        // Constraint slack at mu = 0: complementary slackness holds and
        // the greedy set is optimal as is.
        return Ok(build_solution(p, &sel.set(), None));
    }

    // Bracket the multiplier: g is nondecreasing in mu and reaches qmax.
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut g_hi = sel.probe(p, hi);
    let mut guard = 0;
    while g_hi < qhat {
        lo = hi;
        hi *= 4.0;
        g_hi = sel.probe(p, hi);
        guard += 1;
        if guard > 600 {
            return Err(Error::Inconsistent(
                "quality multiplier bracket did not close".into(),
            ));
        }
    }

    for _ in 0..BISECT_MAX_ITERS {
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
        let mid = lo + (hi - lo) / 2.0;
        let g = sel.probe(p, mid);
        if (g - qhat).abs() < BISECT_RESIDUAL {
            return Ok(build_solution(p, &sel.set(), None));
        }
        if g < qhat {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Exchange repair between the two boundary sets: walk the swaps in
    // decreasing quality gain and stop on the one that crosses qhat.
    let g_lo = sel.probe(p, lo);
    let set_lo = sel.set();
    sel.probe(p, hi);
    let set_hi = sel.set();

    let mut in_lo = vec![false; k];
    let mut in_hi = vec![false; k];
    for &j in &set_lo {
        in_lo[j] = true;
    }
    for &j in &set_hi {
        in_hi[j] = true;
    }
    let mut out: Vec<usize> = set_lo.iter().copied().filter(|&j| !in_hi[j]).collect();
    let mut inc: Vec<usize> = set_hi.iter().copied().filter(|&j| !in_lo[j]).collect();
    debug_assert_eq!(out.len(), inc.len());
    debug_assert!(!out.is_empty(), "boundary sets must differ");
    out.sort_unstable_by(|&a, &b| {
        p.relevance[a]
            .partial_cmp(&p.relevance[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    inc.sort_unstable_by(|&a, &b| {
        p.relevance[b]
            .partial_cmp(&p.relevance[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut kept: Vec<usize> = set_lo.iter().copied().filter(|&j| in_hi[j]).collect();
    let mut running = g_lo;
    for s in 0..out.len() {
        let (a, b) = (out[s], inc[s]);
        let gain = p.relevance[b] - p.relevance[a];
        if running + gain >= qhat {
            let x = ((qhat - running) / gain).clamp(0.0, 1.0);
            kept.extend_from_slice(&out[s + 1..]);
            kept.extend_from_slice(&inc[..s]);
            return Ok(build_solution(p, &kept, Some((a, b, x))));
        }
        running += gain;
    }
    // Floating-point corner: the accumulated gains fell a few ulps short
    // of the recomputed qhat crossing. The feasible-side set stands.
    Ok(build_solution(p, &set_hi, None))
}

/// Assembles the frequency row from unit slots plus an optional blended
/// pair (a at 1-x, b at x).
fn build_solution(
    p: &InnerProblem,
    ones: &[usize],
    blend: Option<(usize, usize, f64)>,
) -> InnerSolution {
    let mut r = vec![0.0; p.k()];
    for &j in ones {
        r[j] = 1.0;
    }
    if let Some((a, b, x)) = blend {
        r[a] = 1.0 - x;
        r[b] = x;
    }
    let objective = r.iter().zip(p.weights).map(|(&r, &v)| r * v).sum();
    let mass: f64 = r.iter().zip(p.relevance).map(|(&r, &u)| r * u).sum();
    let fractional = r
        .iter()
        .filter(|&&v| v > FRACTION_EPS && v < 1.0 - FRACTION_EPS)
        .count();
    InnerSolution {
        r,
        objective,
        quality_slack: mass - p.quality_threshold,
        fractional,
    }
}
