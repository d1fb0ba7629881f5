use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A kernel was evaluated on its singular set (coincident momenta).
    #[error("singular point: kernel evaluated at p = q = {0}")]
    SingularPoint(f64),

    /// Invalid grid, solver or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An iterative or adaptive routine did not reach its tolerance.
    #[error("{what} did not converge (best estimate {estimate:e}, error {error:e})")]
    NonConvergence { what: String, estimate: f64, error: f64 },

    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
