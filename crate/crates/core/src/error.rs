use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variants are grouped by what the caller did wrong: bad input
/// (`Domain`, `Validation`, `Interpretation`, `UnsupportedDimension`,
/// `Parse`, `Config`) versus a computation that could not finish
/// (`Numeric`, `Sampler`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error at index {index}: {reason}")]
    Validation { index: usize, reason: String },

    #[error("cannot interpret Dirichlet parameters: {0}")]
    Interpretation(String),

    #[error("unsupported dimension n = {n} (supported: {supported})")]
    UnsupportedDimension { n: usize, supported: &'static str },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line tool: 2 for input and
    /// configuration problems, 3 for numeric or sampler failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) | Error::Sampler(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
