use thiserror::Error;

/// Everything that can go wrong while building, evaluating or loading a network.
#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("dimension mismatch at layer {layer}: expected {expected}, found {found}")]
    DimensionMismatch {
        layer: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("parse error at {path} (byte {offset}, line {line}, column {column}): {message}")]
    Parse {
        path: String,
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("target `{target}` has no derivative oracle for multi-index {alpha:?}")]
    MissingDerivative { target: String, alpha: Vec<u32> },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ForgeError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ForgeError {
    ForgeError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
