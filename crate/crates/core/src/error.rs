use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{what} = {value} is outside the admissible range {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    /// A configuration or parameter record failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The integrand produced a non-finite sample.
    #[error("integrand is not finite at t = {at}")]
    Integrand { at: f64 },

    /// A profile could not be rescaled to unit Hardy difference.
    #[error("normalization failed: {0}")]
    Normalization(String),

    /// A required evaluation did not produce a usable total.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, range: &'static str) -> Error {
    Error::Domain { what, value, range }
}
