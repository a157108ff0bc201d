//! Monte Carlo session metrics for one stored policy.

use crate::common::{annotate, append_csv, CliError, CliResult, UserFlags};
use clap::Args;
use nfr_core::simulator::Metrics;
use nfr_core::{io, run_monte_carlo};
use std::path::PathBuf;

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub policy: PathBuf,
    #[command(flatten)]
    pub user: UserFlags,
    /// Batch size; defaults to the policy file's own N and must match
    /// it when given.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sessions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Experiment label of the CSV row; defaults to the policy stem.
    #[arg(long)]
    pub label: Option<String>,
    /// CSV file to append to (header written when the file is new).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &SimulateArgs) -> CliResult {
    let instance = io::load_instance(&args.instance).map_err(|e| annotate(e, &args.instance))?;
    let policy = io::load_policy(&args.policy).map_err(|e| annotate(e, &args.policy))?;
    if let Some(n) = args.n {
        if n != policy.n() {
            return Err(CliError::Usage(format!(
                "--n {n} does not match the policy batch size {}",
                policy.n()
            )));
        }
    }
    let user = args.user.build(policy.n())?;
    let metrics = run_monte_carlo(&instance, &policy, &user, args.sessions, args.seed)?;
    print!("{}", metrics.to_kv_text());
    if let Some(path) = &args.out {
        let label = match &args.label {
            Some(label) => label.clone(),
            None => args
                .policy
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "policy".into()),
        };
        append_csv(path, Metrics::CSV_HEADER, &[metrics.to_csv_row(&label, &user)])?;
    }
    Ok(())
}
