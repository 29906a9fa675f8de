//! Shared error type for the whole crate.

use thiserror::Error;

/// Errors produced by geometry, model, training, and I/O operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A direction vector was too short to normalize.
    #[error("degenerate direction: norm {norm:.3e} <= {eps:.0e}")]
    DegenerateDirection { norm: f64, eps: f64 },

    /// A sphere's scale component is too small to normalize; the classifier
    /// represents a plane, which the tetrahedron construction cannot orbit.
    #[error("degenerate sphere scale at {location}: |s5| = {scale:.3e} <= {threshold:.3e}")]
    DegenerateScale {
        scale: f64,
        threshold: f64,
        location: String,
    },

    /// An input had the wrong number of elements.
    #[error("shape mismatch: expected {expected} {what}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A class label was out of range.
    #[error("label {label} out of range for {classes} classes")]
    BadLabel { label: usize, classes: usize },

    /// Training loss became NaN or infinite.
    #[error("non-finite loss {loss} at epoch {epoch}; training aborted")]
    NonFinite { epoch: usize, loss: f64 },

    /// Noise amplitude must be non-negative.
    #[error("negative noise amplitude {0}")]
    NegativeAmplitude(f64),

    /// The anchor triangle used for pose standardization is (near) degenerate.
    #[error("degenerate anchor triangle: area {area:.3e} < {eps:.0e}")]
    DegenerateAnchors { area: f64, eps: f64 },

    /// A precondition on arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A file could not be parsed; carries the offending location.
    #[error("{path}:{line}: parse error: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A file has the wrong schema id, version, or kind.
    #[error("schema mismatch in {path}: {msg}")]
    SchemaMismatch { path: String, msg: String },

    /// An underlying I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
