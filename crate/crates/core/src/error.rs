use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Non-convergence of a series is not an error: it is reported through
/// [`SeriesValue::converged`](crate::SeriesValue::converged).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma pole at {0}")]
    Pole(f64),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid order {m}/{n}: {reason}")]
    InvalidOrder { m: u32, n: u32, reason: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
