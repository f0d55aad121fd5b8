use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The collective single-excitation states are not resolvable because the
    /// level shift Ω is (numerically) zero.
    #[error("degenerate collective basis: level shift Omega = {omega:e} is not above threshold {threshold:e}")]
    DegenerateBasis { omega: f64, threshold: f64 },

    #[error("step size error: {0}")]
    StepSize(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
