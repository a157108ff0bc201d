//! Command-line harness around the core library: builds instances,
//! solves policies, simulates user sessions, sweeps parameter grids and
//! benchmarks the batch-enumeration route.
//!
//! Exit codes: 0 success, 1 usage, 2 bad input data, 3 solver failure.

use clap::{Parser, Subcommand};

mod baseline;
mod bench;
mod common;
mod config;
mod ingest;
mod simulate;
mod solve;
mod stats;
mod sweep;

use common::{exit_code, CliResult};

#[derive(Parser)]
#[command(name = "nfr", version, about = "Network-friendly recommendation toolkit")]
struct Cli {
    /// Worker threads for the solver and simulation pools
    /// (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an instance file from a trace or the synthetic generator.
    Ingest(ingest::IngestArgs),
    /// Solve for the optimal recommendation policy.
    Solve(solve::SolveArgs),
    /// Emit a myopic baseline policy.
    Baseline(baseline::BaselineArgs),
    /// Monte Carlo session metrics for a stored policy.
    Simulate(simulate::SimulateArgs),
    /// Solve and simulate a parameter grid into one CSV matrix.
    Sweep(sweep::SweepArgs),
    /// Time the per-item solver against batch-subset enumeration.
    BenchBatch(bench::BenchArgs),
    /// Connectivity statistics of an instance file.
    Stats(stats::StatsArgs),
}

fn run(command: &Command) -> CliResult {
    match command {
        Command::Ingest(args) => ingest::run(args),
        Command::Solve(args) => solve::run(args),
        Command::Baseline(args) => baseline::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Sweep(args) => sweep::run(args),
        Command::BenchBatch(args) => bench::run(args),
        Command::Stats(args) => stats::run(args),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version leave through this path too; only
            // real parse failures count as usage errors.
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            std::process::exit(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            std::process::exit(1);
        }
    }
    if let Err(e) = run(&cli.command) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
