use thiserror::Error;

/// Errors raised by the library. Variants map onto the failure classes the
/// CLI distinguishes (bad input vs. numerical trouble).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("threshold violated: {0}")]
    Threshold(String),
    #[error("missing dependency: {0}")]
    Dependency(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Param(_) | Error::Degenerate(_) | Error::Range(_) | Error::Format(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::error::Error::Param(format!($($arg)*)) };
}
pub(crate) use param_err;
