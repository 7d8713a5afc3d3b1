use thiserror::Error;

/// Errors raised by the solver library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("convolution weights exhausted: step {step} needs {needed} weights, {available} available")]
    WeightsExhausted { step: usize, needed: usize, available: usize },

    #[error("loss of precision: {0}")]
    PrecisionLoss(String),

    #[error("singular tridiagonal system (pivot {0})")]
    Singular(usize),

    #[error("eigensolve failed: {0}")]
    Eigensolve(String),

    #[error("tolerance not met: error estimate {estimate:e} exceeds {target:e}")]
    Tolerance { estimate: f64, target: f64 },

    #[error("inadmissible noise parameters: {0}")]
    Inadmissible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => 2,
            Error::Inadmissible(_) => 4,
            Error::Io(_) => 2,
            _ => 3,
        }
    }
}
