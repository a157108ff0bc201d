//! End-to-end acceptance gate. Each numbered check pins one observable
//! behavior of the toolkit, from baseline costs through solver
//! optimality, sampling accuracy, simulation consistency and runtime
//! scaling. They run sequentially inside a single test so the final
//! audit can inspect every solver report produced along the way; one
//! line per check is printed (visible with --nocapture), and the test
//! fails if any check fails.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use nfr_core::baselines::{q_mixed_policy, top_n_policy};
use nfr_core::batch::{batch_policy_iteration, BatchMdpConfig};
use nfr_core::ingest::{apply_caching, build_from_adjacency, build_synthetic, ComponentRule};
use nfr_core::inner::InnerProblem;
use nfr_core::instance::{uniform_p0, Instance};
use nfr_core::matrix::DenseMatrix;
use nfr_core::policy::Policy;
use nfr_core::sampler::{empirical_marginals, BatchDistribution};
use nfr_core::simplex::simplex_oracle;
use nfr_core::simulator::{discounted_return, run_monte_carlo};
use nfr_core::solver::{
    evaluate_policy, myopic_solve, policy_iteration, time_average_cost, SolveReport, Solved,
    SolverConfig,
};
use nfr_core::user::UserModel;
use nfr_core::solve_inner;

type CheckResult = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Every policy-iteration run feeds the final audit.
struct Audit {
    reports: Vec<(String, SolveReport)>,
}

impl Audit {
    fn solve(
        &mut self,
        label: &str,
        instance: &Instance,
        user: &UserModel,
    ) -> Result<Solved, String> {
        let solved = policy_iteration(instance, user, &SolverConfig::default())
            .map_err(|e| format!("{label}: solver failed: {e}"))?;
        self.reports.push((label.to_string(), solved.report.clone()));
        Ok(solved)
    }
}

/// Dense random catalog with binary costs: `cached` zero-cost items up
/// front, everything else at 10.
fn random_instance(seed: u64, k: usize, cached: usize) -> Instance {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(k);
    for i in 0..k {
        let mut row: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        row[i] = 0.0;
        rows.push(row);
    }
    let mut costs = vec![10.0; k];
    for c in costs.iter_mut().take(cached) {
        *c = 0.0;
    }
    Instance::new(
        DenseMatrix::from_rows(rows),
        costs,
        uniform_p0(k),
        (0..cached).collect(),
    )
    .unwrap()
}

/// The shared small-catalog suite used by the policy-shape checks.
fn shape_suite() -> Vec<(Instance, usize)> {
    (0..20)
        .map(|t| (random_instance(1000 + t, 50, 5), 1 + (t as usize) % 3))
        .collect()
}

// ---------------------------------------------------------------- check 1

/// Without recommendations the per-request cost is the popularity-
/// weighted cost: 1% cache at cost 0 against cost 10 gives 9.9.
fn check_01_no_recommender_cost() -> CheckResult {
    let t = Instant::now();
    let inst = build_synthetic(1000, 71).map_err(|e| e.to_string())?;
    let inst = apply_caching(&inst, 0.01, 10.0, 0.0).map_err(|e| e.to_string())?;
    ensure(inst.cached_ids().len() == 10, "expected 10 cached items")?;
    let user = UserModel::from_mean_length(0.0, 0.5, 25.0, 2).map_err(|e| e.to_string())?;
    let policy = top_n_policy(&inst, 2).map_err(|e| e.to_string())?;
    let m = run_monte_carlo(&inst, &policy, &user, 1000, 71).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed().as_secs_f64();
    ensure(
        (m.mean_cost - 9.9).abs() <= 0.1,
        format!("mean cost {:.4} outside 9.9 +- 0.1", m.mean_cost),
    )?;
    ensure(elapsed < 10.0, format!("took {elapsed:.1}s, budget 10s"))?;
    Ok(format!("mean cost {:.3} in {:.1}s", m.mean_cost, elapsed))
}

// ---------------------------------------------------------------- check 2

/// At the maximal quality demand the solver must return the pure
/// relevance policy, row for row.
fn check_02_saturated_quality_is_top_n(audit: &mut Audit) -> CheckResult {
    let t = Instant::now();
    for (idx, (inst, n)) in shape_suite().iter().enumerate() {
        let user = UserModel::new(0.8, 1.0, 0.9, *n).map_err(|e| e.to_string())?;
        let solved = audit.solve(&format!("saturated-quality[{idx}]"), inst, &user)?;
        let top = top_n_policy(inst, *n).map_err(|e| e.to_string())?;
        for i in 0..inst.k() {
            for j in 0..inst.k() {
                let (a, b) = (solved.policy.row(i)[j], top.row(i)[j]);
                ensure(
                    (a - b).abs() <= 1e-9,
                    format!("instance {idx} row {i} col {j}: {a} vs top-n {b}"),
                )?;
            }
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    ensure(elapsed < 30.0, format!("took {elapsed:.1}s, budget 30s"))?;
    Ok(format!("20 instances matched in {elapsed:.1}s"))
}

// ---------------------------------------------------------------- check 3

/// With no quality demand the solver recommends the cheapest items,
/// and cost-to-go respects the immediate-cost ordering.
fn check_03_unconstrained_is_low_cost(audit: &mut Audit) -> CheckResult {
    let t = Instant::now();
    for (idx, (inst, n)) in shape_suite().iter().enumerate() {
        let user = UserModel::new(0.8, 0.0, 0.9, *n).map_err(|e| e.to_string())?;
        let solved = audit.solve(&format!("unconstrained[{idx}]"), inst, &user)?;
        let k = inst.k();
        for i in 0..k {
            // The chosen items' costs must match the n smallest costs
            // among the other items (costs compared as multisets, so
            // any member of a cost tie class is acceptable).
            let mut chosen: Vec<f64> = solved
                .policy
                .sparse_row(i)
                .iter()
                .map(|&(j, w)| {
                    ensure((w - 1.0).abs() <= 1e-9, format!("row {i}: fractional {w}"))?;
                    Ok(inst.cost(j))
                })
                .collect::<Result<_, String>>()?;
            chosen.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut all: Vec<f64> = (0..k).filter(|&j| j != i).map(|j| inst.cost(j)).collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (c, expected) in chosen.iter().zip(&all) {
                ensure(
                    (c - expected).abs() <= 1e-9,
                    format!("instance {idx} row {i}: cost {c} vs cheapest {expected}"),
                )?;
            }
        }
        // Cost-to-go ordering: cheaper items have smaller values.
        for i in 0..k {
            for j in 0..k {
                if inst.cost(i) < inst.cost(j) {
                    ensure(
                        solved.values.get(i) <= solved.values.get(j) + 1e-9,
                        format!(
                            "instance {idx}: v({i})={} exceeds v({j})={} despite lower cost",
                            solved.values.get(i),
                            solved.values.get(j)
                        ),
                    )?;
                }
            }
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    ensure(elapsed < 30.0, format!("took {elapsed:.1}s, budget 30s"))?;
    Ok(format!("20 instances matched in {elapsed:.1}s"))
}

// ---------------------------------------------------------------- check 4

/// A user who always leaves after one request makes the solver myopic:
/// the session solve and the one-shot solve coincide per row.
fn check_04_single_request_reduces_to_myopic(audit: &mut Audit) -> CheckResult {
    for (idx, q) in [(0usize, 0.3), (1, 0.5), (2, 0.7)] {
        let inst = random_instance(1100 + idx as u64, 50, 5);
        let n = 2;
        let user = UserModel::new(0.8, q, 0.0, n).map_err(|e| e.to_string())?;
        let solved = audit.solve(&format!("single-request[{idx}]"), &inst, &user)?;
        let myopic = myopic_solve(&inst, &user).map_err(|e| e.to_string())?;
        for i in 0..inst.k() {
            let obj = |p: &Policy| -> f64 {
                p.sparse_row(i).iter().map(|&(j, w)| w * inst.cost(j)).sum()
            };
            let (a, b) = (obj(&solved.policy), obj(&myopic));
            ensure(
                (a - b).abs() <= 1e-9,
                format!("instance {idx} row {i}: objective {a} vs myopic {b}"),
            )?;
        }
    }
    Ok("3 instances, per-row objectives identical".into())
}

// ---------------------------------------------------------------- check 5

/// The production inner solver agrees with the bounded-variable
/// simplex oracle on a thousand random rows and never uses more than
/// two fractional entries.
fn check_05_inner_solver_oracle() -> CheckResult {
    let t = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(55);
    let k = 20;
    let mut max_gap = 0.0f64;
    for case in 0..1000 {
        let n = 1 + case % 5;
        let qrel = 0.1 + 0.1 * ((case / 5) % 9) as f64;
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..10.0)).collect();
        let mut relevance: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let forbidden = rng.random_range(0..k);
        relevance[forbidden] = 0.0;
        let mut by_rel = relevance.clone();
        by_rel.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let qmax: f64 = by_rel.iter().take(n).sum();
        let p = InnerProblem {
            weights: &weights,
            relevance: &relevance,
            forbidden,
            n,
            quality_threshold: qrel * qmax,
        };
        let got = solve_inner(&p).map_err(|e| format!("case {case}: {e}"))?;
        let oracle = simplex_oracle(&p).map_err(|e| format!("case {case} oracle: {e}"))?;
        let gap = (got.objective - oracle.objective).abs();
        max_gap = max_gap.max(gap);
        ensure(
            gap <= 1e-8,
            format!(
                "case {case}: objective {} vs oracle {} (gap {gap:.2e})",
                got.objective, oracle.objective
            ),
        )?;
        ensure(
            got.fractional <= 2,
            format!("case {case}: {} fractional entries", got.fractional),
        )?;
    }
    let elapsed = t.elapsed().as_secs_f64();
    ensure(elapsed < 60.0, format!("took {elapsed:.1}s, budget 60s"))?;
    Ok(format!(
        "1000 rows, worst objective gap {max_gap:.2e}, {elapsed:.1}s"
    ))
}

// ---------------------------------------------------------------- check 6

/// Exhaustive enumeration over all deterministic single-slot policies,
/// evaluated through an independent dense solve, confirms the solver's
/// optimum on tiny catalogs.
fn check_06_exhaustive_policy_enumeration(audit: &mut Audit) -> CheckResult {
    // Local Gaussian elimination, so the reference value never touches
    // the solver's linear algebra.
    fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| {
                a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap()
            })?;
            if a[pivot][col].abs() < 1e-12 {
                return None;
            }
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in 0..n {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for x in col..n {
                        a[row][x] -= f * a[col][x];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
        Some((0..n).map(|i| b[i] / a[i][i]).collect())
    }

    let (alpha, lambda) = (0.7, 0.8);
    for k in [4usize, 5, 6] {
        let inst = random_instance(1200 + k as u64, k, 1);
        let user = UserModel::new(alpha, 0.0, lambda, 1).map_err(|e| e.to_string())?;
        let solved = audit.solve(&format!("exhaustive[k={k}]"), &inst, &user)?;
        let got = solved.values.weighted(inst.p0());

        let mut best = f64::INFINITY;
        let mut choice = vec![0usize; k];
        loop {
            // Build the session kernel for this deterministic policy
            // from first principles and solve (I - lambda P) v = c.
            let mut a = vec![vec![0.0f64; k]; k];
            for i in 0..k {
                let mut rec = choice[i];
                if rec >= i {
                    rec += 1;
                }
                for j in 0..k {
                    let p = if j == rec { alpha } else { 0.0 } + (1.0 - alpha) * inst.p0()[j];
                    let identity = if i == j { 1.0 } else { 0.0 };
                    a[i][j] = identity - lambda * p;
                }
            }
            let v = gauss_solve(a, inst.costs().to_vec())
                .ok_or_else(|| format!("k={k}: singular reference system"))?;
            let obj: f64 = v.iter().zip(inst.p0()).map(|(&v, &p)| v * p).sum();
            best = best.min(obj);

            let mut pos = 0;
            while pos < k {
                choice[pos] += 1;
                if choice[pos] < k - 1 {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
            if pos == k {
                break;
            }
        }
        ensure(
            (got - best).abs() <= 1e-6,
            format!("k={k}: solver {got} vs exhaustive best {best}"),
        )?;
    }
    Ok("K in {4,5,6}: solver optimum equals exhaustive enumeration".into())
}

// ---------------------------------------------------------------- check 7

/// Monte Carlo discounted cost from a fixed start state reproduces the
/// evaluated cost-to-go within two percent.
fn check_07_discounted_simulation_consistency(audit: &mut Audit) -> CheckResult {
    let inst = random_instance(1300, 20, 2);
    let user = UserModel::new(0.8, 0.5, 0.9, 2).map_err(|e| e.to_string())?;
    let solved = audit.solve("discounted-sim", &inst, &user)?;
    let v = evaluate_policy(&inst, &solved.policy, &user, 1e-10).map_err(|e| e.to_string())?;

    let start = 7;
    let horizon = 150; // 0.9^150 ~ 1.4e-7, truncation invisible at 2%
    let runs = 100_000;
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    let mut acc = 0.0;
    for _ in 0..runs {
        acc += discounted_return(&inst, &solved.policy, &user, start, horizon, &mut rng)
            .map_err(|e| e.to_string())?;
    }
    // The trace sum starts at the first request, so the start state's
    // own cost enters once and the rest is discounted one step.
    let estimate = inst.cost(start) + user.lambda * acc / runs as f64;
    let rel = (estimate - v.get(start)).abs() / v.get(start);
    ensure(
        rel <= 0.02,
        format!("estimate {estimate:.4} vs value {:.4}, off {:.2}%", v.get(start), rel * 100.0),
    )?;
    Ok(format!(
        "MC {estimate:.4} vs value {:.4} ({:.2}% off, 1e5 sessions)",
        v.get(start),
        rel * 100.0
    ))
}

// ---------------------------------------------------------------- check 8

/// Batch draws hit their marginals, and the canonical 3-item row
/// reproduces its two-batch decomposition.
fn check_08_sampler_marginals() -> CheckResult {
    let mut rng = ChaCha12Rng::seed_from_u64(88);
    // Random feasible row over 30 items summing to 3.
    let k = 30;
    let n = 3;
    let mut row = vec![0.0f64; k];
    for slot in row.iter_mut().take(n) {
        *slot = 1.0;
    }
    for _ in 0..400 {
        let from = rng.random_range(0..k);
        let to = rng.random_range(0..k);
        if from == to {
            continue;
        }
        let amount = rng.random_range(0.0..=row[from].min(1.0 - row[to]));
        row[from] -= amount;
        row[to] += amount;
    }
    let dist = BatchDistribution::from_row(&row, n).map_err(|e| e.to_string())?;
    let marginals = empirical_marginals(&dist, &mut rng, 100_000);
    let worst = marginals
        .iter()
        .zip(&row)
        .map(|(m, r)| (m - r).abs())
        .fold(0.0f64, f64::max);
    ensure(worst <= 0.01, format!("worst marginal error {worst:.4}"))?;

    // Row [1.0, 0.5, 0.5] at N=2 splits into batches {0,1} and {0,2},
    // half the draws each.
    let dist = BatchDistribution::from_row(&[1.0, 0.5, 0.5], 2).map_err(|e| e.to_string())?;
    let mut first = 0usize;
    let draws = 10_000;
    for _ in 0..draws {
        match dist.sample(&mut rng).as_slice() {
            [0, 1] => first += 1,
            [0, 2] => {}
            other => return Err(format!("unexpected batch {other:?}")),
        }
    }
    let share = first as f64 / draws as f64;
    ensure(
        (share - 0.5).abs() <= 0.02,
        format!("batch {{0,1}} frequency {share:.3} not 0.5 +- 0.02"),
    )?;
    Ok(format!(
        "worst marginal error {worst:.4}; two-batch split {share:.3}/{:.3}",
        1.0 - share
    ))
}

// ---------------------------------------------------------------- check 9

/// On a synthetic catalog the solved policy beats the quality-mixed
/// baseline, which beats pure relevance, at every session length, and
/// the solved policy still meets the quality constraint.
fn check_09_policy_ordering(audit: &mut Audit) -> CheckResult {
    let q = 0.75;
    let alpha = 0.75;
    let n = 2;
    let inst = build_synthetic(500, 99).map_err(|e| e.to_string())?;
    let inst = apply_caching(&inst, 0.01, 10.0, 0.0).map_err(|e| e.to_string())?;
    let qmix = q_mixed_policy(&inst, n, q).map_err(|e| e.to_string())?;
    let top = top_n_policy(&inst, n).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for lbar in [5.0, 25.0, 50.0] {
        let user = UserModel::from_mean_length(alpha, q, lbar, n).map_err(|e| e.to_string())?;
        let solved = audit.solve(&format!("ordering[lbar={lbar}]"), &inst, &user)?;
        let sessions = 1500;
        let m_mdp = run_monte_carlo(&inst, &solved.policy, &user, sessions, 99)
            .map_err(|e| e.to_string())?;
        let m_mix =
            run_monte_carlo(&inst, &qmix, &user, sessions, 99).map_err(|e| e.to_string())?;
        let m_top =
            run_monte_carlo(&inst, &top, &user, sessions, 99).map_err(|e| e.to_string())?;
        ensure(
            m_mdp.mean_cost <= m_mix.mean_cost,
            format!(
                "lbar {lbar}: solver cost {:.3} above mixed {:.3}",
                m_mdp.mean_cost, m_mix.mean_cost
            ),
        )?;
        ensure(
            m_mix.mean_cost <= m_top.mean_cost,
            format!(
                "lbar {lbar}: mixed cost {:.3} above top-n {:.3}",
                m_mix.mean_cost, m_top.mean_cost
            ),
        )?;
        ensure(
            m_mdp.mean_quality >= q - 0.02,
            format!("lbar {lbar}: quality {:.3} below {q}", m_mdp.mean_quality),
        )?;
        lines.push(format!(
            "L={lbar}: {:.2} <= {:.2} <= {:.2}, Q {:.3}",
            m_mdp.mean_cost, m_mix.mean_cost, m_top.mean_cost, m_mdp.mean_quality
        ));
    }
    Ok(lines.join("; "))
}

// --------------------------------------------------------------- check 10

/// Solver runtime barely moves with the batch size, while the
/// subset-enumeration route explodes combinatorially.
fn check_10_batch_size_insensitivity(audit: &mut Audit) -> CheckResult {
    // Per-item solver at K=500: N=1 vs N=5 within a factor of two.
    let inst = build_synthetic(500, 110).map_err(|e| e.to_string())?;
    let inst = apply_caching(&inst, 0.01, 10.0, 0.0).map_err(|e| e.to_string())?;
    let mut wall = Vec::new();
    for n in [1usize, 5] {
        let user = UserModel::new(0.75, 0.75, 0.9, n).map_err(|e| e.to_string())?;
        let t = Instant::now();
        audit.solve(&format!("insensitivity[n={n}]"), &inst, &user)?;
        wall.push(t.elapsed().as_secs_f64());
    }
    let item_ratio = wall[1].max(wall[0]) / wall[1].min(wall[0]);
    ensure(
        item_ratio <= 2.0,
        format!(
            "solve times {:.2}s vs {:.2}s differ by {item_ratio:.2}x",
            wall[0], wall[1]
        ),
    )?;

    // Subset enumeration at K=150 for N = 1, 2, 3: each extra slot
    // multiplies the sweep time by an order of magnitude or more.
    let inst150 = random_instance(111, 150, 2);
    let mut sweep = Vec::new();
    let mut batch_wall = Vec::new();
    for n in [1usize, 2, 3] {
        let user = UserModel::new(0.8, 0.75, 0.9, n).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let solved = batch_policy_iteration(&inst150, &user, &BatchMdpConfig::default())
            .map_err(|e| format!("enumeration n={n}: {e}"))?;
        batch_wall.push(t.elapsed().as_secs_f64());
        sweep.push(solved.report.mean_enumeration_seconds());
    }
    ensure(
        sweep[1] >= 10.0 * sweep[0] && sweep[2] >= 10.0 * sweep[1],
        format!("sweep times {sweep:?} lack combinatorial growth"),
    )?;
    ensure(
        sweep[2] >= 500.0 * sweep[0],
        format!("sweep times {sweep:?}: N=3 not >= 500x N=1"),
    )?;

    // And the enumeration route loses to the per-item solver at N=3.
    let user3 = UserModel::new(0.8, 0.75, 0.9, 3).map_err(|e| e.to_string())?;
    let t = Instant::now();
    audit.solve("insensitivity[item k=150]", &inst150, &user3)?;
    let item3 = t.elapsed().as_secs_f64();
    ensure(
        batch_wall[2] >= 10.0 * item3,
        format!(
            "enumeration {:.2}s not >= 10x per-item {:.3}s",
            batch_wall[2], item3
        ),
    )?;
    Ok(format!(
        "item N1/N5 ratio {item_ratio:.2}; sweeps {:.1}ms/{:.0}ms/{:.1}s; enum/item {:.0}x",
        sweep[0] * 1e3,
        sweep[1] * 1e3,
        sweep[2],
        batch_wall[2] / item3
    ))
}

// --------------------------------------------------------------- check 11

/// Near the no-discount limit the optimizer is self-consistent: the
/// policy solved at lambda 0.9 already attains the lambda 0.99
/// time-average cost of the policy solved there, within one percent.
fn check_11_stationary_self_consistency(audit: &mut Audit) -> CheckResult {
    // Directed random graph in the adjacency-ingest format.
    let mut rng = ChaCha12Rng::seed_from_u64(113);
    let nodes = 260u64;
    let mut edges = Vec::new();
    for src in 0..nodes {
        for _ in 0..6 {
            let dst = rng.random_range(0..nodes);
            if dst != src {
                edges.push((src, dst));
            }
        }
    }
    let (inst, _) =
        build_from_adjacency(&edges, 113, ComponentRule::Weak).map_err(|e| e.to_string())?;
    let inst = apply_caching(&inst, 0.01, 10.0, 0.0).map_err(|e| e.to_string())?;

    let user09 = UserModel::new(0.8, 0.5, 0.9, 2).map_err(|e| e.to_string())?;
    let user99 = UserModel::new(0.8, 0.5, 0.99, 2).map_err(|e| e.to_string())?;
    let pol09 = audit.solve("stationary[0.9]", &inst, &user09)?.policy;
    let pol99 = audit.solve("stationary[0.99]", &inst, &user99)?.policy;
    let tac09 = time_average_cost(&inst, &user99, &pol09).map_err(|e| e.to_string())?;
    let tac99 = time_average_cost(&inst, &user99, &pol99).map_err(|e| e.to_string())?;
    let rel = (tac09 - tac99).abs() / tac99;
    ensure(
        rel <= 0.01,
        format!("time-average costs {tac09:.4} vs {tac99:.4} differ by {:.2}%", rel * 100.0),
    )?;
    Ok(format!(
        "time-average {tac09:.4} vs {tac99:.4} ({:.3}% apart, K={})",
        rel * 100.0,
        inst.k()
    ))
}

// --------------------------------------------------------------- check 12

/// Every solve recorded by the earlier checks descended monotonically
/// and finished with a tight optimality certificate.
fn check_12_monotone_convergence(audit: &Audit) -> CheckResult {
    ensure(!audit.reports.is_empty(), "no solver runs were recorded")?;
    for (label, report) in &audit.reports {
        ensure(report.converged, format!("{label}: not converged"))?;
        ensure(
            report.bellman_residual <= 1e-6,
            format!("{label}: residual {:.2e}", report.bellman_residual),
        )?;
        for w in report.objective_trace.windows(2) {
            ensure(
                w[1] <= w[0] + 1e-7,
                format!("{label}: objective rose {} -> {}", w[0], w[1]),
            )?;
        }
    }
    Ok(format!(
        "{} solver runs: monotone traces, residuals <= 1e-6",
        audit.reports.len()
    ))
}

// ------------------------------------------------------------------ driver

#[test]
fn acceptance() {
    let mut audit = Audit {
        reports: Vec::new(),
    };
    let mut results: Vec<(&str, CheckResult)> = Vec::new();

    results.push(("01 no-recommender-cost", check_01_no_recommender_cost()));
    results.push((
        "02 saturated-quality-is-top-n",
        check_02_saturated_quality_is_top_n(&mut audit),
    ));
    results.push((
        "03 unconstrained-is-low-cost",
        check_03_unconstrained_is_low_cost(&mut audit),
    ));
    results.push((
        "04 single-request-is-myopic",
        check_04_single_request_reduces_to_myopic(&mut audit),
    ));
    results.push(("05 inner-solver-oracle", check_05_inner_solver_oracle()));
    results.push((
        "06 exhaustive-enumeration",
        check_06_exhaustive_policy_enumeration(&mut audit),
    ));
    results.push((
        "07 discounted-simulation",
        check_07_discounted_simulation_consistency(&mut audit),
    ));
    results.push(("08 sampler-marginals", check_08_sampler_marginals()));
    results.push(("09 policy-ordering", check_09_policy_ordering(&mut audit)));
    results.push((
        "10 batch-size-insensitivity",
        check_10_batch_size_insensitivity(&mut audit),
    ));
    results.push((
        "11 stationary-self-consistency",
        check_11_stationary_self_consistency(&mut audit),
    ));
    results.push(("12 monotone-convergence", check_12_monotone_convergence(&audit)));

    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(detail) => println!("check {name}: PASS ({detail})"),
            Err(reason) => {
                failed += 1;
                println!("check {name}: FAIL ({reason})");
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance check(s) failed");
}
