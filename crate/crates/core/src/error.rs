use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NsbfError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("non-finite sample at index {index} ({context})")]
    NonFinite { index: usize, context: String },

    #[error("Picard iteration did not converge after {iterations} sweeps (last update {last_update:e})")]
    Convergence { iterations: usize, last_update: f64 },

    #[error("particular solution vanishes or changes sign at x = {x} (u0 = {value:e}); a spectral shift would be required")]
    NonVanishing { x: f64, value: f64 },

    #[error("numerical breakdown while computing {what} at n = {n}")]
    NumericalBreakdown { n: usize, what: String },

    #[error("characteristic function is not finite at omega = {omega}")]
    Evaluation { omega: f64 },

    #[error("insufficient data for decay fit: {usable} usable points, at least {required} needed")]
    InsufficientData { usable: usize, required: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for NsbfError {
    fn from(e: std::io::Error) -> Self {
        NsbfError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, NsbfError>;
