//! Shared plumbing: error-to-exit-code mapping, session-model flags and
//! small file helpers.

use clap::Args;
use nfr_core::solver::EvalMethod;
use nfr_core::{Error, UserModel};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

/// CLI failures split into usage problems (exit 1) and library errors
/// (exit 2 for bad data, 3 for solver failures).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

pub type CliResult<T = ()> = std::result::Result<T, CliError>;

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) | CliError::Core(Error::InvalidArgument(_)) => 1,
        CliError::Core(
            Error::Io(_) | Error::Parse { .. } | Error::Ingest(_) | Error::Inconsistent(_),
        ) => 2,
        CliError::Core(_) => 3,
    }
}

/// Session-model flags shared by solve and simulate. Exactly one of
/// --lambda / --lbar picks the continuation probability.
#[derive(Args, Debug)]
pub struct UserFlags {
    /// Session-continuation probability in [0, 1).
    #[arg(long, conflicts_with = "lbar")]
    pub lambda: Option<f64>,
    /// Mean session length >= 1; shorthand for lambda = 1 - 1/lbar.
    #[arg(long)]
    pub lbar: Option<f64>,
    /// Quality floor in [0, 1].
    #[arg(long)]
    pub q: f64,
    /// Click-through probability in [0, 1).
    #[arg(long)]
    pub alpha: f64,
}

impl UserFlags {
    pub fn build(&self, n: usize) -> CliResult<UserModel> {
        let user = match (self.lambda, self.lbar) {
            (Some(lambda), None) => UserModel::new(self.alpha, self.q, lambda, n),
            (None, Some(lbar)) => UserModel::from_mean_length(self.alpha, self.q, lbar, n),
            _ => {
                return Err(CliError::Usage(
                    "exactly one of --lambda / --lbar is required".into(),
                ))
            }
        };
        Ok(user?)
    }
}

/// Stamps the offending path into IO and parse errors, which carry
/// none themselves.
pub fn annotate(e: Error, path: &Path) -> CliError {
    CliError::Core(match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| annotate(Error::Io(e), path))
}

pub fn parse_eval_method(name: &str) -> CliResult<EvalMethod> {
    match name {
        "auto" => Ok(EvalMethod::Auto),
        "direct" => Ok(EvalMethod::Direct),
        "iterative" => Ok(EvalMethod::Iterative),
        other => Err(CliError::Usage(format!(
            "unknown eval method {other:?}; expected auto, direct or iterative"
        ))),
    }
}

/// FNV-1a, for content-addressed policy caching.
pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Appends rows to a CSV file, writing `header` first when the file is
/// new or empty.
pub fn append_csv(path: &Path, header: &str, rows: &[String]) -> CliResult {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(file, "{header}")?;
    }
    for row in rows {
        writeln!(file, "{row}")?;
    }
    Ok(())
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Rewrites a text file through temp-plus-rename, so parallel sweep
/// workers racing on the same cache entry never leave a torn file.
pub fn write_atomic(path: &Path, content: &str) -> CliResult {
    let tag = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = path.with_extension(format!("tmp.{}.{tag}", std::process::id()));
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
