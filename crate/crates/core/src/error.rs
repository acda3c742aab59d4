use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to
/// print a one-line diagnostic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Parameters violate a stated precondition (fractions, budgets, ranges).
    #[error("invalid parameters: {0}")]
    Invalid(String),
    /// T2 cannot decode the primary message in the listening phase.
    #[error("T2 cannot decode the primary message: |cTT| = {ctt} must exceed |c11| = {c11}")]
    NotDecodable { ctt: f64, c11: f64 },
    /// A joint distribution failed validation.
    #[error("invalid pmf: {0}")]
    Pmf(String),
    /// Structural hypothesis of a bound does not hold for the input.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A caller asked for something the input cannot support.
    #[error("usage error: {0}")]
    Usage(String),
    /// Search found no parameter point meeting the constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// File system or format failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
