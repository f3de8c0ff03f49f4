use thiserror::Error;

/// Errors raised by the discretization, model and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("radial functions live on different grids")]
    GridMismatch,

    /// The exponential factor exp(alpha0 |t|^gamma) would leave the
    /// double-precision range.
    #[error("value {value} outside the admissible range: exponent {exponent} exceeds {limit}")]
    Range {
        value: f64,
        exponent: f64,
        limit: f64,
    },

    #[error("Gram matrix is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("no sign change of the fibering derivative found on [{lower:e}, {upper:e}]: {reason}")]
    NoBracket {
        lower: f64,
        upper: f64,
        reason: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("profile parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
