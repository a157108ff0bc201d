//! Degree statistics and CCDF export for stored instances.

use crate::common::{annotate, write_atomic, CliResult};
use clap::Args;
use nfr_core::ingest::{degree_ccdf, degree_stats};
use nfr_core::io;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Write the out-degree CCDF as `degree,ccdf` rows.
    #[arg(long)]
    pub ccdf: Option<PathBuf>,
}

pub fn run(args: &StatsArgs) -> CliResult {
    let instance = io::load_instance(&args.instance).map_err(|e| annotate(e, &args.instance))?;
    print!("{}", degree_stats(&instance).to_kv_text());
    if let Some(path) = &args.ccdf {
        let mut text = String::from("degree,ccdf\n");
        for (degree, fraction) in degree_ccdf(&instance) {
            let _ = writeln!(text, "{degree},{fraction}");
        }
        write_atomic(path, &text)?;
    }
    Ok(())
}
