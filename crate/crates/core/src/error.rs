use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Every checker in this crate returns a residual instead of failing, so these
/// variants are reserved for inputs that cannot be processed at all.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("positivity violated: eigenvalue {0:e} below tolerance")]
    Positivity(f64),
    #[error("precondition failed: {what} (residual {residual:e})")]
    Precondition { what: String, residual: f64 },
    #[error("capacity exceeded: {what} needs {needed} entries, cap is {cap}")]
    Capacity {
        what: String,
        needed: u128,
        cap: usize,
    },
    #[error("dominant eigenvalue is not trustworthy: {0}")]
    Dominance(String),
    #[error("numerical drift: {0}")]
    Drift(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_capacity(what: &str, needed: u128, cap: usize) -> Result<()> {
    if needed > cap as u128 {
        return Err(Error::Capacity {
            what: what.to_string(),
            needed,
            cap,
        });
    }
    Ok(())
}
