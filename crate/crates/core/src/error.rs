use thiserror::Error;

use crate::lp::LpError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quality table: {0}")]
    InvalidTable(String),
    #[error("invalid criteria: {0}")]
    InvalidCriteria(String),
    #[error("unknown classifier `{0}`")]
    UnknownClassifier(String),
    #[error("invalid automorphism on criterion {criterion}: {reason}")]
    InvalidAutomorphism { criterion: usize, reason: String },
    #[error("system has no consistent representation")]
    Inconsistent,
    #[error("delta {delta} exceeds delta_max: the constraint set is empty")]
    DeltaInfeasible { delta: f64 },
    #[error("delta must lie in [0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("dominance verdicts are not transitive: {a} >= {b} and {b} >= {c} but not {a} >= {c}")]
    TransitivityViolation { a: String, b: String, c: String },
    #[error("invalid test configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Precondition(String),
    #[error("csv error at {location}: {message}")]
    Csv { location: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
