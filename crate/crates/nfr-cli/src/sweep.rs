//! Grid sweep: solve the MDP policy per point (through a
//! content-addressed cache), build the three myopic baselines, simulate
//! everything and emit one CSV matrix with relative gains.

use crate::common::{annotate, fnv64, read_text, write_atomic, CliResult};
use crate::config::SweepConfig;
use clap::Args;
use log::info;
use nfr_core::ingest::{apply_caching, build_synthetic};
use nfr_core::simulator::{relative_gain, Metrics};
use nfr_core::solver::SolverConfig;
use nfr_core::{
    io, low_cost_policy, policy_iteration, q_mixed_policy, run_monte_carlo, top_n_policy,
    Instance, Policy, UserModel,
};
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

#[derive(Args)]
pub struct SweepArgs {
    /// Flat key-value grid description (see README).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; metrics.csv and cache/ live here.
    #[arg(long)]
    pub out: PathBuf,
}

/// Columns appended to the per-run metrics: the simulation seed, how
/// much cheaper the MDP runs relative to this row's policy, the MDP's
/// cache-hit gain over it, and a status cell for partial failures.
const EXTRA_HEADER: &str = "seed,mdp_cost_saving_pct,mdp_hit_gain_pct,status";

type BaselineCache = Mutex<HashMap<String, Arc<Policy>>>;

pub fn run(args: &SweepArgs) -> CliResult {
    let cfg = SweepConfig::parse(&read_text(&args.config)?).map_err(|e| annotate(e, &args.config))?;
    let instance = load_or_build(&cfg)?;
    // The cache key binds instance content, not the file path.
    let instance_hash = fnv64(io::write_instance(&instance).as_bytes());
    let cache_dir = args.out.join("cache");
    fs::create_dir_all(&cache_dir)?;

    let solver_config = SolverConfig {
        eval_method: cfg.eval_method,
        max_iterations: cfg.max_iterations.unwrap_or(SolverConfig::default().max_iterations),
        ..SolverConfig::default()
    };
    let mut points = Vec::new();
    for &lambda in &cfg.lambdas() {
        for &q in &cfg.q {
            for &alpha in &cfg.alpha {
                for &n in &cfg.n {
                    points.push((lambda, q, alpha, n));
                }
            }
        }
    }

    let baselines: BaselineCache = Mutex::new(HashMap::new());
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|&(lambda, q, alpha, n)| {
            point_rows(
                &instance,
                instance_hash,
                &cfg,
                &solver_config,
                &cache_dir,
                &baselines,
                lambda,
                q,
                alpha,
                n,
            )
        })
        .collect();

    let mut text = format!("{},{EXTRA_HEADER}\n", Metrics::CSV_HEADER);
    for row in rows.iter().flatten() {
        text.push_str(row);
        text.push('\n');
    }
    let csv_path = args.out.join("metrics.csv");
    write_atomic(&csv_path, &text)?;
    println!(
        "wrote {} rows over {} grid points to {}",
        rows.iter().map(Vec::len).sum::<usize>(),
        points.len(),
        csv_path.display()
    );
    Ok(())
}

fn load_or_build(cfg: &SweepConfig) -> CliResult<Instance> {
    let instance = match (&cfg.instance, cfg.synthetic_k) {
        (Some(path), None) => io::load_instance(path).map_err(|e| annotate(e, path))?,
        (None, Some(k)) => build_synthetic(k, cfg.synthetic_seed)?,
        _ => unreachable!("config validation enforces one source"),
    };
    Ok(match cfg.cache_ratio {
        Some(ratio) => apply_caching(&instance, ratio, cfg.cost_uncached, cfg.cost_cached)?,
        None => instance,
    })
}

#[allow(clippy::too_many_arguments)]
fn point_rows(
    instance: &Instance,
    instance_hash: u64,
    cfg: &SweepConfig,
    solver_config: &SolverConfig,
    cache_dir: &Path,
    baselines: &BaselineCache,
    lambda: f64,
    q: f64,
    alpha: f64,
    n: usize,
) -> Vec<String> {
    let seed = cfg.seed;
    let user = match UserModel::new(alpha, q, lambda, n) {
        Ok(user) => user,
        Err(e) => return vec![error_row("mdp", lambda, q, alpha, n, seed, &e)],
    };
    let mut rows = Vec::with_capacity(4);

    let mdp_metrics = match solve_cached(instance, instance_hash, &user, solver_config, cache_dir)
        .and_then(|policy| {
            Ok(run_monte_carlo(instance, &policy, &user, cfg.sessions, seed)?)
        }) {
        Ok(metrics) => {
            rows.push(ok_row(&metrics, "mdp", &user, seed, Some(&metrics)));
            Some(metrics)
        }
        Err(e) => {
            rows.push(error_row("mdp", lambda, q, alpha, n, seed, &e));
            None
        }
    };

    let kinds: [(&str, Box<dyn Fn() -> nfr_core::Result<Policy>>); 3] = [
        ("top-n", Box::new(|| top_n_policy(instance, n))),
        ("low-cost", Box::new(|| low_cost_policy(instance, n))),
        ("q-mixed", Box::new(|| q_mixed_policy(instance, n, q))),
    ];
    for (label, build) in kinds {
        let key = format!("{label}|{n}|{:016x}", q.to_bits());
        let outcome = baseline_cached(baselines, key, build).and_then(|policy| {
            Ok(run_monte_carlo(instance, &policy, &user, cfg.sessions, seed)?)
        });
        match outcome {
            Ok(metrics) => rows.push(ok_row(&metrics, label, &user, seed, mdp_metrics.as_ref())),
            Err(e) => rows.push(error_row(label, lambda, q, alpha, n, seed, &e)),
        }
    }
    info!("point lambda={lambda} q={q} alpha={alpha} n={n} done");
    rows
}

/// Loads the policy for this (instance, user, solver) key from the
/// on-disk cache, or solves and stores it.
fn solve_cached(
    instance: &Instance,
    instance_hash: u64,
    user: &UserModel,
    config: &SolverConfig,
    cache_dir: &Path,
) -> CliResult<Policy> {
    let key = fnv64(
        format!(
            "{instance_hash:016x}|{:016x}|{:016x}|{:016x}|{}|{}|{}",
            user.lambda.to_bits(),
            user.q.to_bits(),
            user.alpha.to_bits(),
            user.n,
            config.eval_method.name(),
            config.max_iterations,
        )
        .as_bytes(),
    );
    let path = cache_dir.join(format!("{key:016x}.policy"));
    if path.exists() {
        info!("policy cache hit: {}", path.display());
        return Ok(io::load_policy(&path)?);
    }
    let solved = policy_iteration(instance, user, config)?;
    write_atomic(&path, &io::write_policy(&solved.policy))?;
    Ok(solved.policy)
}

fn baseline_cached(
    cache: &BaselineCache,
    key: String,
    build: impl FnOnce() -> nfr_core::Result<Policy>,
) -> CliResult<Arc<Policy>> {
    if let Some(policy) = cache.lock().unwrap().get(&key) {
        return Ok(policy.clone());
    }
    // A racing duplicate build lands on the same value; first in wins.
    let policy = Arc::new(build()?);
    Ok(cache
        .lock()
        .unwrap()
        .entry(key)
        .or_insert(policy)
        .clone())
}

fn ok_row(
    metrics: &Metrics,
    label: &str,
    user: &UserModel,
    seed: u64,
    mdp: Option<&Metrics>,
) -> String {
    let (saving, hit_gain) = match mdp {
        Some(reference) => (
            if metrics.mean_cost > 0.0 {
                format!(
                    "{:.4}",
                    (metrics.mean_cost - reference.mean_cost) / metrics.mean_cost * 100.0
                )
            } else {
                String::new()
            },
            relative_gain(reference, metrics)
                .map(|g| format!("{g:.4}"))
                .unwrap_or_default(),
        ),
        None => (String::new(), String::new()),
    };
    format!("{},{seed},{saving},{hit_gain},ok", metrics.to_csv_row(label, user))
}

/// Same 17 columns as an ok row, metrics and gains left empty.
fn error_row(
    label: &str,
    lambda: f64,
    q: f64,
    alpha: f64,
    n: usize,
    seed: u64,
    error: &dyn Display,
) -> String {
    let mut fields = vec![
        label.to_string(),
        lambda.to_string(),
        q.to_string(),
        alpha.to_string(),
        n.to_string(),
    ];
    fields.extend(std::iter::repeat(String::new()).take(8));
    fields.push(seed.to_string());
    fields.extend([String::new(), String::new()]);
    fields.push(format!("error: {}", error.to_string().replace(',', ";")));
    fields.join(",")
}
