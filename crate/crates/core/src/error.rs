use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate spectrum: discriminant {discriminant:e} below tolerance {tolerance:e}")]
    DegenerateSpectrum { discriminant: f64, tolerance: f64 },

    #[error("wrong basis: expected {expected}, got {actual}")]
    Basis {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("pole at epsilon = -1")]
    Pole,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid normalization: N~^2 = {0:e}")]
    InvalidNormalization(f64),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("line {line}: {key}: {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error("unknown dataset '{name}' (available: {available})")]
    UnknownDataset { name: String, available: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
