//! Network-friendly recommendation toolkit: catalog model, per-state
//! inner solver, discounted-session MDP solver, myopic baselines, batch
//! sampling, Monte Carlo session simulation and dataset ingestion.

pub mod baselines;
pub mod batch;
mod comb;
pub mod error;
pub mod ingest;
pub mod inner;
pub mod instance;
pub mod io;
pub mod matrix;
pub mod policy;
pub mod sampler;
pub mod simplex;
pub mod simulator;
pub mod solver;
pub mod user;

pub use baselines::{low_cost_policy, q_mixed_policy, top_n_policy};
pub use batch::{batch_policy_iteration, BatchMdpConfig, BatchMdpReport, BatchSolved};
pub use error::{Error, Result};
pub use ingest::{
    apply_caching, build_from_adjacency, build_from_ratings, build_synthetic, degree_ccdf,
    degree_stats, ComponentRule, IngestReport, RatingsParams,
};
pub use inner::{solve_inner, InnerProblem, InnerSolution};
pub use instance::{uniform_p0, Instance};
pub use matrix::DenseMatrix;
pub use policy::{Policy, ValidationReport};
pub use sampler::{empirical_marginals, BatchDistribution};
pub use simulator::{
    discounted_return, relative_gain, run_monte_carlo, simulate_session, Metrics, SessionTrace,
};
pub use solver::{
    evaluate_policy, evaluate_policy_with, improve_policy, myopic_solve, policy_iteration,
    time_average_cost, EvalMethod, SolveReport, Solved, SolverConfig, ValueVector,
};
pub use user::{ClickModel, CuriousClick, UserModel};
