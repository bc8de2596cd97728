use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: every mode needs at least 2 levels")]
    InvalidDimension { dim: usize },

    #[error("electronic mode must have dimension 2, got {dim}")]
    ElectronicDimension { dim: usize },

    #[error("composite dimension {total} exceeds the cap of {cap} amplitudes")]
    MemoryCap { total: usize, cap: usize },

    #[error("truncation too small: |alpha| = {magnitude} needs dimension {required}, got {dim}")]
    TruncationTooSmall {
        magnitude: f64,
        dim: usize,
        required: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical overflow: {0}")]
    NumericalOverflow(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("unknown mode {0}")]
    UnknownMode(String),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// True for failures that come from numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalOverflow(_) | Error::TruncationTooSmall { .. } | Error::MemoryCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
