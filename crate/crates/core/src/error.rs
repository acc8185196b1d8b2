use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no eligible candidate left to select")]
    Exhausted,

    #[error("numerical breakdown at candidate {index}: squared power {power_sq:e} is below the floor {floor:e}")]
    Breakdown {
        index: usize,
        power_sq: f64,
        floor: f64,
    },

    #[error("kernel matrix is numerically singular ({0} points)")]
    Singular(usize),

    #[error("inconsistent native norm: |f|^2 = {f_norm_sq:e} but |s_n|^2 = {partial:e}")]
    InconsistentNorm { f_norm_sq: f64, partial: f64 },

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
