use std::path::PathBuf;

/// Errors raised by the toolkit.
///
/// Bounds that divide by a vanishing singular value are not errors; they
/// evaluate to `None` and are flagged inapplicable in reports.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("frame is not orthonormal: deviation {deviation:e} exceeds {tolerance:e}")]
    NotOrthonormal { deviation: f64, tolerance: f64 },

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    NoConvergence { rows: usize, cols: usize },

    #[error("unsupported Schatten exponent {0}")]
    UnsupportedExponent(String),

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
