//! Instance construction subcommands over the ingest module.

use crate::common::{read_text, write_atomic, CliResult};
use clap::{Args, Subcommand};
use nfr_core::ingest::{
    apply_caching, build_from_adjacency, build_from_ratings, build_synthetic, degree_stats,
    parse_edge_list, parse_ratings, ComponentRule, RatingsParams, DEFAULT_COST_CACHED,
    DEFAULT_COST_UNCACHED,
};
use nfr_core::io;
use std::path::PathBuf;

#[derive(Args)]
pub struct IngestArgs {
    #[command(subcommand)]
    pub source: Source,
}

#[derive(Subcommand)]
pub enum Source {
    /// Random catalog: out-degrees uniform on {1..100}, weights U(0.5, 1).
    Synthetic {
        /// Catalog size (at least 101, so the degree range fits).
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Directed edge list, one whitespace-separated `from to` per line.
    Adjacency {
        path: PathBuf,
        /// Keep the largest strongly connected component instead of the
        /// weakly connected default.
        #[arg(long)]
        strong: bool,
        /// Seed for the Uniform(0.5, 1) edge weights.
        #[arg(long, default_value_t = 0)]
        weight_seed: u64,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// `user,item,rating` lines; item-item collaborative filtering.
    Ratings {
        path: PathBuf,
        /// Similarities below this are zeroed.
        #[arg(long, default_value_t = 0.5)]
        floor: f64,
        /// Iteratively drop items related to fewer than this many others.
        #[arg(long, default_value_t = 25)]
        min_related: usize,
        /// Neighborhood size of the rating completion.
        #[arg(long, default_value_t = 50)]
        neighbors: usize,
        #[command(flatten)]
        output: OutputFlags,
    },
}

#[derive(Args)]
pub struct OutputFlags {
    /// Instance file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Mark the first ceil(ratio * K) items as cached and assign the
    /// binary cost vector.
    #[arg(long)]
    pub cache_ratio: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_COST_UNCACHED)]
    pub cost_uncached: f64,
    #[arg(long, default_value_t = DEFAULT_COST_CACHED)]
    pub cost_cached: f64,
    /// Also write the ingest report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run(args: &IngestArgs) -> CliResult {
    let (instance, mut report, output) = match &args.source {
        Source::Synthetic { k, seed, output } => {
            let instance = build_synthetic(*k, *seed)?;
            let report = degree_stats(&instance);
            (instance, report, output)
        }
        Source::Adjacency {
            path,
            strong,
            weight_seed,
            output,
        } => {
            let text = read_text(path)?;
            let edges = parse_edge_list(&text).map_err(|e| crate::common::annotate(e, path))?;
            let rule = if *strong {
                ComponentRule::Strong
            } else {
                ComponentRule::Weak
            };
            let (instance, report) = build_from_adjacency(&edges, *weight_seed, rule)?;
            (instance, report, output)
        }
        Source::Ratings {
            path,
            floor,
            min_related,
            neighbors,
            output,
        } => {
            let text = read_text(path)?;
            let ratings = parse_ratings(&text).map_err(|e| crate::common::annotate(e, path))?;
            let params = RatingsParams {
                floor: *floor,
                min_related: *min_related,
                neighbors: *neighbors,
            };
            let (instance, report) = build_from_ratings(&ratings, &params)?;
            (instance, report, output)
        }
    };
    let instance = match output.cache_ratio {
        Some(ratio) => apply_caching(&instance, ratio, output.cost_uncached, output.cost_cached)?,
        None => instance,
    };
    // Cached-degree statistics only mean something once a cached set
    // exists, so recompute them after the caching step.
    report.mean_cached_out_degree = degree_stats(&instance).mean_cached_out_degree;
    io::save_instance(&output.out, &instance)?;
    let text = report.to_kv_text();
    print!("{text}");
    if let Some(path) = &output.report {
        write_atomic(path, &text)?;
    }
    Ok(())
}
