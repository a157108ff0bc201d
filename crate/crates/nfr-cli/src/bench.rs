//! Wall-clock comparison of the per-item solver against exhaustive
//! batch-subset enumeration, with objective cross-checks at the
//! deterministic endpoints q = 0 and q = 1.

use crate::common::{annotate, write_atomic, CliResult};
use clap::Args;
use log::info;
use nfr_core::ingest::{apply_caching, build_synthetic, DEFAULT_COST_CACHED, DEFAULT_COST_UNCACHED};
use nfr_core::solver::SolverConfig;
use nfr_core::{batch_policy_iteration, io, policy_iteration, BatchMdpConfig, Error, UserModel};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args)]
pub struct BenchArgs {
    /// Instance file; when omitted, a synthetic catalog of --k items.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, default_value_t = 150)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub cache_ratio: f64,
    /// Batch sizes to bench.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 0.9)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.75)]
    pub q: f64,
    #[arg(long, default_value_t = 0.8)]
    pub alpha: f64,
    /// Per-state subset cap; enumeration above it is refused.
    #[arg(long, default_value_t = 2e6)]
    pub max_subsets: f64,
    /// Skip the q in {0, 1} objective-agreement runs.
    #[arg(long)]
    pub skip_verify: bool,
    /// Also write the table to a CSV file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const HEADER: &str = "n,subsets_per_state,item_seconds,batch_seconds,\
mean_sweep_seconds,batch_iterations,item_objective,batch_objective,status";

/// binom(k - 1, n) as a float, for rows where enumeration refused.
fn subsets_per_state(k: usize, n: usize) -> f64 {
    (0..n).map(|t| (k - 1 - t) as f64 / (t + 1) as f64).product()
}

pub fn run(args: &BenchArgs) -> CliResult {
    let instance = match &args.instance {
        Some(path) => io::load_instance(path).map_err(|e| annotate(e, path))?,
        None => apply_caching(
            &build_synthetic(args.k, args.seed)?,
            args.cache_ratio,
            DEFAULT_COST_UNCACHED,
            DEFAULT_COST_CACHED,
        )?,
    };
    let solver_config = SolverConfig::default();
    let batch_config = BatchMdpConfig {
        max_subsets: args.max_subsets,
        ..BatchMdpConfig::default()
    };

    let mut lines = vec![HEADER.to_string()];
    for &n in &args.n_grid {
        let user = UserModel::new(args.alpha, args.q, args.lambda, n)?;
        let start = Instant::now();
        let item = policy_iteration(&instance, &user, &solver_config)?;
        let item_seconds = start.elapsed().as_secs_f64();
        let item_objective = item.values.weighted(instance.p0());

        let start = Instant::now();
        match batch_policy_iteration(&instance, &user, &batch_config) {
            Ok(batch) => lines.push(format!(
                "{n},{},{item_seconds:.4},{:.4},{:.6},{},{item_objective:.6},{:.6},ok",
                batch.report.subsets_per_state,
                start.elapsed().as_secs_f64(),
                batch.report.mean_enumeration_seconds(),
                batch.report.iterations,
                batch.values.weighted(instance.p0()),
            )),
            Err(Error::Refused(msg)) => {
                info!("n={n}: {msg}");
                lines.push(format!(
                    "{n},{},{item_seconds:.4},,,,{item_objective:.6},,refused",
                    subsets_per_state(instance.k(), n),
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }

    if !args.skip_verify {
        for &n in &args.n_grid {
            for endpoint in [0.0, 1.0] {
                let user = UserModel::new(args.alpha, endpoint, args.lambda, n)?;
                let item = policy_iteration(&instance, &user, &solver_config)?;
                match batch_policy_iteration(&instance, &user, &batch_config) {
                    Ok(batch) => {
                        let a = item.values.weighted(instance.p0());
                        let b = batch.values.weighted(instance.p0());
                        if (a - b).abs() > 1e-6 {
                            return Err(Error::Inconsistent(format!(
                                "objective mismatch at q={endpoint}, n={n}: \
                                 item {a} vs enumeration {b}"
                            ))
                            .into());
                        }
                        println!("verify n={n} q={endpoint}: objectives agree ({a:.6})");
                    }
                    Err(Error::Refused(_)) => {
                        println!("verify n={n} q={endpoint}: skipped (above subset cap)");
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }

    for line in &lines {
        println!("{line}");
    }
    if let Some(path) = &args.out {
        write_atomic(path, &(lines.join("\n") + "\n"))?;
    }
    Ok(())
}
