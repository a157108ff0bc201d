//! Myopic reference policies as policy files.

use crate::common::{annotate, CliError, CliResult};
use clap::{ArgGroup, Args};
use nfr_core::{io, low_cost_policy, q_mixed_policy, top_n_policy};
use std::path::PathBuf;

#[derive(Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["top_n", "low_cost", "q_mixed"])))]
pub struct BaselineArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Highest-relevance batch per row.
    #[arg(long)]
    pub top_n: bool,
    /// Cheapest batch per row.
    #[arg(long)]
    pub low_cost: bool,
    /// Entrywise q * Top-N + (1 - q) * Low Cost.
    #[arg(long)]
    pub q_mixed: bool,
    /// Mixing weight; required with --q-mixed.
    #[arg(long)]
    pub q: Option<f64>,
    /// Batch size N.
    #[arg(long)]
    pub n: usize,
    /// Policy file to write.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &BaselineArgs) -> CliResult {
    let instance = io::load_instance(&args.instance).map_err(|e| annotate(e, &args.instance))?;
    let policy = if args.top_n {
        top_n_policy(&instance, args.n)?
    } else if args.low_cost {
        low_cost_policy(&instance, args.n)?
    } else {
        let q = args
            .q
            .ok_or_else(|| CliError::Usage("--q-mixed needs --q".into()))?;
        q_mixed_policy(&instance, args.n, q)?
    };
    io::save_policy(&args.out, &policy)?;
    Ok(())
}
