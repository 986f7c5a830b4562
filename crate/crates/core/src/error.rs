use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The damping exponent is outside the range the result holds for.
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    /// The requested closed form needs complex characteristic roots.
    #[error("branch error at r = {r}: {message}")]
    Branch { r: f64, message: String },

    /// An integral or series does not converge.
    #[error("divergence: {0}")]
    Divergence(String),

    /// An iterative evaluation ran out of budget before converging.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// The ODE oracle detected energy growth, i.e. the step is unstable.
    #[error("unstable step size: {0}")]
    Instability(String),

    /// Invalid or unsupported initial datum description.
    #[error("datum error: {0}")]
    Datum(String),

    /// A curve or fit could not be formed.
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
