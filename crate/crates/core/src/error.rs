use thiserror::Error;

/// Errors raised by the laboratory.
///
/// The variants are coarse categories; the CLI maps them onto exit codes
/// (parameter/regime/input/domain errors are "invalid input", numerical
/// and I/O errors are failures of the run itself).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// A parameter violates its basic constraint (n < 3, p ≤ 1, a = 0, ...).
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: &'static str, reason: String },

    /// Parameters are valid but outside the regime where the quantity is defined.
    #[error("outside regime: {0}")]
    Regime(String),

    /// A point outside the domain of a function (r ≤ 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or insufficient input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// The numerics broke down.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        LabError::Parameter {
            field,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
