use thiserror::Error;

/// Errors raised across the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed sparse structure, index out of range or dimension mismatch.
    #[error("structural error: {0}")]
    Structural(String),

    /// A factorization met a pivot below the singularity threshold.
    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    /// NaN/inf encountered or an iteration produced unusable values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Dense eigensolver failure; `found` pairs were usable before the failure.
    #[error("eigensolver failed: {reason} ({found} pairs usable)")]
    Eigen { reason: String, found: usize },

    #[error("mesh error: {0}")]
    Mesh(String),

    /// Parameter outside the domain of an operation (e.g. G below Nyquist).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
