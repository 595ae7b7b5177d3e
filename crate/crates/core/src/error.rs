use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge probability {0} is outside the admissible range")]
    InvalidProbability(f64),
    #[error("graph must have at least one vertex, got n = {0}")]
    InvalidSize(usize),
    #[error("p_next = {next} violates the {mode} coupling (current p = {current})")]
    MonotonicityViolation {
        mode: &'static str,
        current: f64,
        next: f64,
    },
    #[error("vertex index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid edge ({i}, {j}): {reason}")]
    InvalidEdge { i: usize, j: usize, reason: &'static str },
    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),
    #[error("target vertex {0} is isolated")]
    IsolatedTarget(usize),
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("top eigenvalue {0} differs from 1 by more than 1e-10")]
    TopEigenvalue(f64),
    #[error("spectral gap 1 - lambda_2 = {0:e} is below 1e-8")]
    NearDisconnected(f64),
    #[error("start and target coincide (vertex {0})")]
    SameVertex(usize),
    #[error("graph is not connected")]
    NotConnected,
    #[error("absorbing system is singular at pivot {0}")]
    SingularSystem(usize),
    #[error("walk exceeded {0} steps without hitting the target")]
    StepCapExceeded(u64),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("too many disconnected samples at n = {n}: {rejected} rejected")]
    TooManyRejections { n: usize, rejected: usize },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("solve and spectral H_j disagree at n = {n}, rep = {rep}: relative error {rel_err:e}")]
    CrossMethodMismatch { n: usize, rep: usize, rel_err: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name, printed by the CLI on domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidProbability(_) => "InvalidProbability",
            Error::InvalidSize(_) => "InvalidSize",
            Error::MonotonicityViolation { .. } => "MonotonicityViolation",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidEdge { .. } => "InvalidEdge",
            Error::IsolatedVertex(_) => "IsolatedVertex",
            Error::IsolatedTarget(_) => "IsolatedTarget",
            Error::ConvergenceFailure(_) => "ConvergenceFailure",
            Error::TopEigenvalue(_) => "TopEigenvalue",
            Error::NearDisconnected(_) => "NearDisconnected",
            Error::SameVertex(_) => "SameVertex",
            Error::NotConnected => "NotConnected",
            Error::SingularSystem(_) => "SingularSystem",
            Error::StepCapExceeded(_) => "StepCapExceeded",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::TooManyRejections { .. } => "TooManyRejections",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::CrossMethodMismatch { .. } => "CrossMethodMismatch",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse { .. } => "ParseError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }
}
