//! User behavior parameters shared by the solver and the simulator.

use crate::error::{Error, Result};

/// Behavioral parameters of the recommendation session model.
///
/// * `alpha`: probability of clicking some recommended item instead of
///   jumping back to the catalog distribution p0.
/// * `q`: per-state quality floor as a fraction of the best achievable
///   batch quality.
/// * `lambda`: session continuation probability; the mean session length
///   is 1/(1-lambda).
/// * `n`: number of items in every recommendation batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserModel {
    pub alpha: f64,
    pub q: f64,
    pub lambda: f64,
    pub n: usize,
}

impl UserModel {
    pub fn new(alpha: f64, q: f64, lambda: f64, n: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [0,1), got {alpha}"
            )));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!(
                "q must lie in [0,1], got {q}"
            )));
        }
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "lambda must lie in [0,1), got {lambda}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("batch size n must be >= 1".into()));
        }
        Ok(UserModel { alpha, q, lambda, n })
    }

    /// Builds the model from a mean session length L >= 1 via
    /// lambda = 1 - 1/L.
    pub fn from_mean_length(alpha: f64, q: f64, mean_length: f64, n: usize) -> Result<Self> {
        if !(mean_length >= 1.0) || !mean_length.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mean session length must be >= 1, got {mean_length}"
            )));
        }
        UserModel::new(alpha, q, 1.0 - 1.0 / mean_length, n)
    }

    /// Mean session length 1/(1-lambda).
    pub fn mean_length(&self) -> f64 {
        1.0 / (1.0 - self.lambda)
    }
}

/// Click attention rule: probability that the user, viewing item `i`,
/// follows a recommendation slot holding item `j`. The transition kernel
/// multiplies this by the slot frequency r_ij.
pub trait ClickModel {
    fn click_weight(&self, i: usize, j: usize, u_row: &[f64], r_row: &[f64]) -> f64;
}

/// The shipped specialization: every recommended item receives the same
/// attention alpha/N regardless of position or relevance.
#[derive(Debug, Clone, Copy)]
pub struct CuriousClick {
    pub alpha: f64,
    pub n: usize,
}

impl ClickModel for CuriousClick {
    #[inline]
    fn click_weight(&self, _i: usize, _j: usize, _u_row: &[f64], _r_row: &[f64]) -> f64 {
        self.alpha / self.n as f64
    }
}

impl From<&UserModel> for CuriousClick {
    fn from(u: &UserModel) -> Self {
        CuriousClick {
            alpha: u.alpha,
            n: u.n,
        }
    }
}
