use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the laboratory.
///
/// Variants are grouped by how a caller is expected to react: precondition
/// failures (bad inputs, bad configs) versus numerical aborts (integrator,
/// minimizer) versus plain I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    UnsupportedOrder(u32),

    #[error("unsupported norm `{0}` (expected 2, 4, 6 or h1-seminorm)")]
    UnsupportedNorm(String),

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("operation is undefined for the zero field: {0}")]
    ZeroField(&'static str),

    #[error("soliton leaves the box: {0}")]
    OutOfBox(String),

    #[error("no sign change of the shooting functional in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("minimizer diverged: {0}")]
    Divergence(String),

    #[error("minimizer collapsed to the zero field after {0} iterations")]
    Collapse(usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("integrator aborted: {0}")]
    IntegratorAbort(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("malformed field file {path}: {reason}")]
    FieldFormat { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the caller's inputs rather than by the numerics.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::UnsupportedOrder(_)
                | Error::UnsupportedNorm(_)
                | Error::LengthMismatch { .. }
                | Error::GridMismatch
                | Error::InvalidParameters(_)
                | Error::ZeroField(_)
                | Error::OutOfBox(_)
                | Error::NoSignChange { .. }
                | Error::Precondition(_)
                | Error::Config(_)
                | Error::FieldFormat { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
