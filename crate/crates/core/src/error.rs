use thiserror::Error;

use crate::compiler::FitResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("map is not completely positive: Choi eigenvalue {min_eigenvalue:e} below tolerance")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("infeasible budget: allowances {allowance:e} leave no room under threshold {threshold:e}")]
    InfeasibleBudget { allowance: f64, threshold: f64 },

    #[error("target not reachable: residual {:e} exceeds tolerance {eta:e}", .fit.residual)]
    CompileFailure { fit: Box<FitResult>, eta: f64 },

    #[error("malformed channel document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
