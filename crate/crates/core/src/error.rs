use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BanditError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("reward {0} is not binary")]
    NonBinaryReward(f64),

    #[error("empty action set")]
    EmptyActionSet,

    #[error("confidence region is empty (phase-one residual {0:e})")]
    EmptyRegion(f64),

    #[error("could not certify feasibility after {0} constraint cuts")]
    FeasibilityNotCertified(usize),

    #[error("interior-point solver failed: {0}")]
    SolverFailure(String),

    #[error("exact evaluation requires a finite context distribution")]
    GenerativeEnvironment,

    #[error("environment audit failed: {0}")]
    Audit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed csv at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, BanditError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> BanditError {
    BanditError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn io_err(path: &std::path::Path, e: std::io::Error) -> BanditError {
    BanditError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
