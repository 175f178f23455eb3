use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension {0} too small (need at least 2)")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("truncation too small: amplitude {amplitude:.4} needs dim >= {required}, got {dim}")]
    TruncationTooSmall {
        amplitude: f64,
        required: usize,
        dim: usize,
    },

    #[error("truncation leak at step {step}: top-level population {population:.3e} above tolerance {tol:.1e}")]
    TruncationLeak { step: usize, population: f64, tol: f64 },

    #[error("phase factor must have unit modulus, got |phase| = {0}")]
    InvalidPhase(f64),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("state straddles the kicked level {s}: population {below:.3e} below and {above:.3e} above")]
    StraddlingSupport { s: usize, below: f64, above: f64 },

    #[error("adiabaticity violation at waypoint {index}: step {size:.4} exceeds cap {cap}")]
    Adiabaticity { index: usize, size: f64, cap: f64 },

    #[error("overlap violation: {what} (Gaussian overlap {overlap:.3e})")]
    Overlap { what: String, overlap: f64 },

    #[error("positivity violation: minimum eigenvalue {0:.3e}")]
    Positivity(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
