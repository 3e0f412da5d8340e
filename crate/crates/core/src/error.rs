use thiserror::Error;

/// Errors raised by the simulation library.
///
/// The variants are grouped so a caller (the CLI in particular) can map them
/// onto exit codes: parameter/contract problems are validation failures,
/// numeric problems are runtime failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("index out of range: {what} = {index}, limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("truncation error on mode {mode}: tail mass {tail:.3e} exceeds tolerance {tolerance:.3e}")]
    Truncation {
        mode: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("outside domain of validity: {0}")]
    Domain(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("steady state is not unique: null space dimension {dimension}")]
    Ambiguous { dimension: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors that stem from bad inputs rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Numeric(_) | Error::Ambiguous { .. } | Error::Invariant(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_param(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}
