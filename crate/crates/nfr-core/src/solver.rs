//! Discounted-session MDP solver: policy evaluation, policy improvement
//! and policy iteration over batch-frequency policies.
//!
//! The session kernel P = (alpha/N) R + (1-alpha) 1 p0^T splits into a
//! sparse part and a rank-one part, so evaluation never forms P. With
//! A = I - (lambda alpha / N) R and x = A^{-1} c,
//!
//!   v = x + lambda (1-alpha) (p0.x) / (1-lambda) * 1,
//!
//! using A^{-1} 1 = 1/(1 - lambda alpha) * 1 (policy rows sum to N).
//! The Bellman residual of v equals the fixed-point residual of x, so
//! the tolerance contract transfers unchanged.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inner::{solve_inner, InnerProblem};
use crate::instance::Instance;
use crate::matrix::{lu_solve, DenseMatrix};
use crate::policy::Policy;
use crate::user::UserModel;

/// Default fixed-point residual tolerance for evaluation.
pub const EVAL_TOL: f64 = 1e-9;
/// Default improvement threshold on successive value vectors.
pub const IMPROVE_EPS: f64 = 1e-7;
/// Two policies closer than this entrywise are the same policy.
pub const POLICY_COINCIDE_TOL: f64 = 1e-9;
/// Largest catalog evaluated by dense LU under EvalMethod::Auto.
pub const DIRECT_EVAL_MAX_K: usize = 4000;

/// How policy evaluation solves its linear system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    /// Direct dense solve up to K = 4000, fixed-point iteration above.
    Auto,
    Direct,
    Iterative,
}

impl EvalMethod {
    fn resolve(self, k: usize) -> EvalMethod {
        match self {
            EvalMethod::Auto => {
                if k <= DIRECT_EVAL_MAX_K {
                    EvalMethod::Direct
                } else {
                    EvalMethod::Iterative
                }
            }
            m => m,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EvalMethod::Auto => "auto",
            EvalMethod::Direct => "direct",
            EvalMethod::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub eval_tolerance: f64,
    pub improve_eps: f64,
    pub max_iterations: usize,
    pub eval_method: EvalMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eval_tolerance: EVAL_TOL,
            improve_eps: IMPROVE_EPS,
            max_iterations: 100,
            eval_method: EvalMethod::Auto,
        }
    }
}

/// Expected discounted session cost per start state.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector {
    values: Vec<f64>,
}

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Self {
        ValueVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// p0-weighted mean: the scalar objective the solver drives down.
    pub fn weighted(&self, p0: &[f64]) -> f64 {
        self.values.iter().zip(p0).map(|(&v, &p)| v * p).sum()
    }

    pub fn max_abs_diff(&self, other: &ValueVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Converged output of policy iteration.
#[derive(Debug, Clone)]
pub struct Solved {
    pub policy: Policy,
    pub values: ValueVector,
    pub report: SolveReport,
}

/// Diagnostics of one policy_iteration run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub bellman_residual: f64,
    pub eval_seconds: f64,
    pub improve_seconds: f64,
    /// p0-weighted objective after each evaluation, in round order.
    pub objective_trace: Vec<f64>,
    pub eval_method: EvalMethod,
    pub converged: bool,
}

impl SolveReport {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }

    /// Flat key-value block, one `key: value` per line.
    pub fn to_kv_text(&self) -> String {
        let trace = self
            .objective_trace
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        format!(
            "iterations: {}\nconverged: {}\nbellman-residual: {:e}\n\
             eval-seconds: {:.6}\nimprove-seconds: {:.6}\neval-method: {}\n\
             objective: {}\nobjective-trace: {}\n",
            self.iterations,
            self.converged,
            self.bellman_residual,
            self.eval_seconds,
            self.improve_seconds,
            self.eval_method.name(),
            self.objective(),
            trace
        )
    }

    pub const CSV_HEADER: &'static str =
        "iterations,converged,bellman_residual,eval_seconds,improve_seconds,eval_method,objective";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:e},{:.6},{:.6},{},{}",
            self.iterations,
            self.converged,
            self.bellman_residual,
            self.eval_seconds,
            self.improve_seconds,
            self.eval_method.name(),
            self.objective()
        )
    }
}

fn check_shapes(instance: &Instance, policy: &Policy, user: &UserModel) -> Result<()> {
    if policy.k() != instance.k() {
        return Err(Error::InvalidArgument(format!(
            "policy is over {} items, instance has {}",
            policy.k(),
            instance.k()
        )));
    }
    if policy.n() != user.n {
        return Err(Error::InvalidArgument(format!(
            "policy batch size {} differs from user model batch size {}",
            policy.n(),
            user.n
        )));
    }
    Ok(())
}

/// Evaluates `policy` under the default method switch.
pub fn evaluate_policy(
    instance: &Instance,
    policy: &Policy,
    user: &UserModel,
    tolerance: f64,
) -> Result<ValueVector> {
    evaluate_policy_with(instance, policy, user, tolerance, EvalMethod::Auto)
}

/// Evaluates `policy`: the unique v with v = c + lambda P v, with
/// fixed-point residual at most `tolerance`.
pub fn evaluate_policy_with(
    instance: &Instance,
    policy: &Policy,
    user: &UserModel,
    tolerance: f64,
    method: EvalMethod,
) -> Result<ValueVector> {
    check_shapes(instance, policy, user)?;
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let k = instance.k();
    let c = instance.costs();
    let lambda = user.lambda;
    if lambda == 0.0 {
        return Ok(ValueVector::new(c.to_vec()));
    }
    let beta = lambda * user.alpha / user.n as f64;

    let rows: Vec<Vec<(usize, f64)>> = (0..k).map(|i| policy.sparse_row(i)).collect();

    let mut x = match method.resolve(k) {
        EvalMethod::Direct => {
            let mut a = DenseMatrix::zeros(k, k);
            for i in 0..k {
                let row = a.row_mut(i);
                row[i] = 1.0;
                for &(j, r) in &rows[i] {
                    row[j] -= beta * r;
                }
            }
            lu_solve(a, c).ok_or_else(|| {
                Error::Inconsistent("singular evaluation system".into())
            })?
        }
        _ => c.to_vec(),
    };

    // Fixed-point refinement x <- c + beta R x. The direct path normally
    // enters with a residual near machine precision and exits at once;
    // the iterative path contracts by lambda * alpha per sweep.
    let mut next = vec![0.0f64; k];
    let mut iterations = 0usize;
    let residual = loop {
        let mut residual = 0.0f64;
        for i in 0..k {
            let mut acc = 0.0;
            for &(j, r) in &rows[i] {
                acc += r * x[j];
            }
            let xi = c[i] + beta * acc;
            residual = residual.max((xi - x[i]).abs());
            next[i] = xi;
        }
        std::mem::swap(&mut x, &mut next);
        if residual <= tolerance {
            break residual;
        }
        iterations += 1;
        if iterations > 1_000_000 {
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        }
    };
    debug_assert!(residual <= tolerance);

    let p0x: f64 = x.iter().zip(instance.p0()).map(|(&x, &p)| x * p).sum();
    let shift = lambda * (1.0 - user.alpha) * p0x / (1.0 - lambda);
    let v: Vec<f64> = x.iter().map(|&x| x + shift).collect();
    Ok(ValueVector::new(v))
}

/// One improvement sweep: row i minimizes sum_j r_ij v(j) subject to
/// the budget, box and quality constraints of state i. Rows are
/// independent and solved in parallel; output is deterministic.
pub fn improve_policy(
    instance: &Instance,
    user: &UserModel,
    values: &ValueVector,
) -> Result<Policy> {
    Ok(improve_with_objectives(instance, user, values.as_slice())?.0)
}

/// Improvement plus the per-row minimized objectives (used for the
/// Bellman residual and the myopic equivalence checks).
pub fn improve_with_objectives(
    instance: &Instance,
    user: &UserModel,
    weights: &[f64],
) -> Result<(Policy, Vec<f64>)> {
    let k = instance.k();
    if weights.len() != k {
        return Err(Error::InvalidArgument(format!(
            "weight vector length {} != K={k}",
            weights.len()
        )));
    }
    let thresholds: Vec<f64> = (0..k)
        .map(|i| Ok(user.q * instance.q_max(i, user.n)?))
        .collect::<Result<_>>()?;
    let solved: Vec<(Vec<f64>, f64)> = (0..k)
        .into_par_iter()
        .map(|i| {
            let p = InnerProblem {
                weights,
                relevance: instance.u_row(i),
                forbidden: i,
                n: user.n,
                quality_threshold: thresholds[i],
            };
            let s = solve_inner(&p)?;
            Ok((s.r, s.objective))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(k);
    let mut objectives = Vec::with_capacity(k);
    for (row, obj) in solved {
        rows.push(row);
        objectives.push(obj);
    }
    Ok((Policy::from_rows(rows, user.n), objectives))
}

/// Max-norm Bellman residual of (v, row objectives) under the session
/// kernel decomposition.
pub(crate) fn bellman_residual(
    instance: &Instance,
    user: &UserModel,
    v: &[f64],
    row_objectives: &[f64],
) -> f64 {
    let p0v: f64 = v.iter().zip(instance.p0()).map(|(&v, &p)| v * p).sum();
    let jump = user.lambda * (1.0 - user.alpha) * p0v;
    let scale = user.lambda * user.alpha / user.n as f64;
    v.iter()
        .zip(instance.costs())
        .zip(row_objectives)
        .map(|((&v, &c), &m)| (v - c - jump - scale * m).abs())
        .fold(0.0, f64::max)
}

/// Policy iteration to a Bellman-optimal batch-frequency policy.
///
/// Alternates exact evaluation and improvement until successive value
/// vectors move less than `improve_eps` or the policy stops changing,
/// then certifies a Bellman residual at most 10 * improve_eps. The
/// p0-weighted objective trace is monotone non-increasing up to the
/// evaluation tolerance.
pub fn policy_iteration(
    instance: &Instance,
    user: &UserModel,
    config: &SolverConfig,
) -> Result<Solved> {
    if config.max_iterations == 0 {
        return Err(Error::InvalidArgument(
            "max_iterations must be at least 1".into(),
        ));
    }
    let mut eval_seconds = 0.0f64;
    let mut improve_seconds = 0.0f64;
    let mut trace = Vec::new();

    // Myopic warm start: at lambda = 0 this is already the fixed point.
    let t = Instant::now();
    let (mut policy, _) = improve_with_objectives(instance, user, instance.costs())?;
    improve_seconds += t.elapsed().as_secs_f64();

    let mut v_prev: Option<ValueVector> = None;
    let mut best: Option<Solved> = None;

    for round in 1..=config.max_iterations {
        let t = Instant::now();
        let values = evaluate_policy_with(
            instance,
            &policy,
            user,
            config.eval_tolerance,
            config.eval_method,
        )?;
        eval_seconds += t.elapsed().as_secs_f64();
        trace.push(values.weighted(instance.p0()));

        let t = Instant::now();
        let (next, objectives) = improve_with_objectives(instance, user, values.as_slice())?;
        improve_seconds += t.elapsed().as_secs_f64();

        let residual = bellman_residual(instance, user, values.as_slice(), &objectives);
        let coincide = max_policy_diff(&policy, &next) <= POLICY_COINCIDE_TOL;
        let settled = v_prev
            .as_ref()
            .is_some_and(|p| values.max_abs_diff(p) < config.improve_eps);

        let report = SolveReport {
            iterations: round,
            bellman_residual: residual,
            eval_seconds,
            improve_seconds,
            objective_trace: trace.clone(),
            eval_method: config.eval_method,
            converged: false,
        };
        if (coincide || settled) && residual <= 10.0 * config.improve_eps {
            return Ok(Solved {
                policy,
                values,
                report: SolveReport {
                    converged: true,
                    ..report
                },
            });
        }
        if best
            .as_ref()
            .is_none_or(|b| residual < b.report.bellman_residual)
        {
            best = Some(Solved {
                policy: policy.clone(),
                values: values.clone(),
                report,
            });
        }
        policy = next;
        v_prev = Some(values);
    }

    let best = best.expect("at least one round ran");
    Err(Error::Stalled {
        iterations: config.max_iterations,
        residual: best.report.bellman_residual,
        best: Box::new(best),
    })
}

fn max_policy_diff(a: &Policy, b: &Policy) -> f64 {
    let mut d = 0.0f64;
    for i in 0..a.k() {
        for (x, y) in a.row(i).iter().zip(b.row(i)) {
            d = d.max((x - y).abs());
        }
    }
    d
}

/// Per-state minimization with the immediate costs as weights; equals
/// policy_iteration output at lambda = 0.
pub fn myopic_solve(instance: &Instance, user: &UserModel) -> Result<Policy> {
    Ok(improve_with_objectives(instance, user, instance.costs())?.0)
}

/// (1-lambda) times the p0-weighted value: approximates the stationary
/// per-request cost as lambda -> 1.
pub fn time_average_cost(
    instance: &Instance,
    user: &UserModel,
    policy: &Policy,
) -> Result<f64> {
    let v = evaluate_policy(instance, policy, user, EVAL_TOL)?;
    Ok((1.0 - user.lambda) * v.weighted(instance.p0()))
}
