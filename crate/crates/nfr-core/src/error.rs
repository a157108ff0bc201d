use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    /// A caller-supplied argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A constrained problem has no feasible point; carries the best
    /// achievable value of the violated constraint.
    #[error("infeasible: required {required}, achievable {achievable}")]
    Infeasible { required: f64, achievable: f64 },

    /// An iterative method ran out of its iteration budget.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Policy iteration hit its round cap; the best pair found so far
    /// rides along so callers can still inspect or use it.
    #[error("policy iteration stalled after {iterations} rounds (residual {residual:.3e})")]
    Stalled {
        iterations: usize,
        residual: f64,
        best: Box<crate::solver::Solved>,
    },

    /// An internal consistency check failed (e.g. a stochastic row does
    /// not sum to one within tolerance).
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    /// Input data could not be turned into a model.
    #[error("ingest error: {0}")]
    Ingest(String),

    /// A text file did not match the expected line-oriented format.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Enumeration refused to run above the configured combinatorial cap.
    #[error("refused: {0}")]
    Refused(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
