use thiserror::Error;

/// Errors reported by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for exact solver: {size} > limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unit-demand variant requires identical demands: {0}")]
    NonUniformDemands(String),

    #[error("target-group instance has customers but no targets")]
    DegenerateVrtg,

    #[error("invalid walk solution: {0}")]
    InvalidWalkSolution(String),

    #[error("invalid multigraph: {0}")]
    InvalidMultigraph(String),

    #[error("weak fractional construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
