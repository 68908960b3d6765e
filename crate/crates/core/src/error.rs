use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Bessel power series could not be summed to full accuracy.
    #[error("normalized Bessel series did not converge at z = {z}, nu = {nu}")]
    Convergence { z: f64, nu: f64 },

    /// A table or expansion was requested beyond its validated size.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Grids and functions handed to a transform plan do not match it.
    #[error("plan error: {0}")]
    Plan(String),

    /// Sampled data contains non-finite values or mismatched lengths.
    #[error("data error: {0}")]
    Data(String),

    /// A weight integral was requested at an exponent where it diverges.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// Malformed configuration or input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e))
    }
}
