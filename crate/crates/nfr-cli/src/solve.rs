//! Policy iteration entry point: instance file in, policy file out.

use crate::common::{annotate, parse_eval_method, write_atomic, CliResult, UserFlags};
use clap::Args;
use nfr_core::solver::SolverConfig;
use nfr_core::{io, policy_iteration};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub user: UserFlags,
    /// Batch size N.
    #[arg(long)]
    pub n: usize,
    /// Policy file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also store the value vector.
    #[arg(long)]
    pub values: Option<PathBuf>,
    /// Also store the solve report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Policy evaluation route: auto, direct or iterative.
    #[arg(long, default_value = "auto")]
    pub eval_method: String,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

pub fn run(args: &SolveArgs) -> CliResult {
    let instance = io::load_instance(&args.instance).map_err(|e| annotate(e, &args.instance))?;
    let user = args.user.build(args.n)?;
    let mut config = SolverConfig {
        eval_method: parse_eval_method(&args.eval_method)?,
        ..SolverConfig::default()
    };
    if let Some(cap) = args.max_iterations {
        config.max_iterations = cap;
    }
    let start = Instant::now();
    let solved = policy_iteration(&instance, &user, &config)?;
    let wall = start.elapsed().as_secs_f64();
    io::save_policy(&args.out, &solved.policy)?;
    if let Some(path) = &args.values {
        io::save_values(path, &solved.values)?;
    }
    let text = format!("{}wall-seconds: {wall:.6}\n", solved.report.to_kv_text());
    print!("{text}");
    if let Some(path) = &args.report {
        write_atomic(path, &text)?;
    }
    Ok(())
}
