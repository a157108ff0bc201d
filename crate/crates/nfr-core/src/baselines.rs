//! Reference policies the solver is measured against: pure relevance
//! (Top-N), pure cost (Low-Cost) and their quality-weighted mix.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::policy::Policy;

fn check_n(k: usize, n: usize) -> Result<()> {
    if n == 0 || n >= k {
        return Err(Error::InvalidArgument(format!(
            "batch size must satisfy 1 <= N <= K-1, got N={n} K={k}"
        )));
    }
    Ok(())
}

/// Each state recommends its N most relevant items. Ties break toward
/// higher relevance, then lower cost, then lower index.
pub fn top_n_policy(instance: &Instance, n: usize) -> Result<Policy> {
    check_n(instance.k(), n)?;
    let sets: Vec<Vec<usize>> = (0..instance.k())
        .map(|i| instance.top_n_set(i, n))
        .collect::<Result<_>>()?;
    Ok(Policy::from_sets(instance.k(), &sets, n))
}

/// Each state recommends the N cheapest other items, ignoring
/// relevance entirely. Ties break toward lower index.
pub fn low_cost_policy(instance: &Instance, n: usize) -> Result<Policy> {
    let k = instance.k();
    check_n(k, n)?;
    let mut sets = Vec::with_capacity(k);
    for i in 0..k {
        let mut order: Vec<usize> = (0..k).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            instance
                .cost(a)
                .partial_cmp(&instance.cost(b))
                .unwrap()
                .then(a.cmp(&b))
        });
        order.truncate(n);
        sets.push(order);
    }
    Ok(Policy::from_sets(k, &sets, n))
}

/// Convex combination q * TopN + (1-q) * LowCost, entry by entry.
/// Overlapping picks stack (an item in both sets gets weight 1); rows
/// still sum to N because both parents do. A final pass clips any
/// floating-point spill above 1 and redistributes it to the row's
/// largest remaining headroom.
pub fn q_mixed_policy(instance: &Instance, n: usize, q: f64) -> Result<Policy> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "mix weight must lie in [0,1], got {q}"
        )));
    }
    let top = top_n_policy(instance, n)?;
    let low = low_cost_policy(instance, n)?;
    let k = instance.k();
    let mut rows = Vec::with_capacity(k);
    for i in 0..k {
        let mut row: Vec<f64> = top
            .row(i)
            .iter()
            .zip(low.row(i))
            .map(|(&t, &l)| q * t + (1.0 - q) * l)
            .collect();
        redistribute_spill(&mut row, i);
        rows.push(row);
    }
    Ok(Policy::from_rows(rows, n))
}

/// Clips entries above 1 and hands the excess to the entry with the
/// most headroom. With exact parents both in {0,1} the combination
/// never exceeds q + (1-q) = 1, so this only moves floating-point dust.
fn redistribute_spill(row: &mut [f64], skip: usize) {
    loop {
        let mut spill = 0.0;
        for (j, r) in row.iter_mut().enumerate() {
            if j != skip && *r > 1.0 {
                spill += *r - 1.0;
                *r = 1.0;
            }
        }
        if spill <= 0.0 {
            return;
        }
        let target = row
            .iter()
            .enumerate()
            .filter(|&(j, &r)| j != skip && r < 1.0)
            .max_by(|a, b| {
                let ha = 1.0 - a.1;
                let hb = 1.0 - b.1;
                ha.partial_cmp(&hb).unwrap().then(b.0.cmp(&a.0))
            })
            .map(|(j, _)| j);
        match target {
            Some(j) => row[j] = (row[j] + spill).min(1.0),
            None => return,
        }
    }
}
