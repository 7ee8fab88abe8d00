use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are grouped by how a caller is expected to react: domain and
/// configuration errors indicate bad input, integration and singularity errors
/// indicate that a numerical procedure could not meet its contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("wavefunction evaluated at a pole (beta = {beta}) of the momentum basis")]
    Pole { beta: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("truncation failure: {0}")]
    Truncation(String),

    #[error("tolerance breach: {0}")]
    Tolerance(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Configuration(msg.into()))
}
