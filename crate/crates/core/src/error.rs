use thiserror::Error;

use crate::types::CoefficientVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid folds: K = {k} with n = {n} (need 2 <= K <= n)")]
    InvalidFolds { n: usize, k: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("every penalty weight is infinite; the only feasible solution is zero")]
    DegenerateWeights,

    #[error("coordinate {0} has zero penalty weight; lambda_max is unbounded")]
    UnpenalizedCoordinate(usize),

    #[error("no penalized coordinate is correlated with the response")]
    ZeroSignal,

    #[error("design is singular: {0}")]
    SingularDesign(String),

    #[error(
        "coordinate descent did not converge after {sweeps} sweeps (last change {last_change:e})"
    )]
    Convergence {
        sweeps: usize,
        last_change: f64,
        last_iterate: Box<CoefficientVector>,
    },

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
