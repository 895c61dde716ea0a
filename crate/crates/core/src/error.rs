use thiserror::Error;

/// Failure classes. The CLI maps them onto process exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("singular configuration: {0}")]
    Singularity(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Process exit code: 2 validation, 3 numeric, 4 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 2,
            Error::Numeric(_) | Error::Singularity(_) | Error::NoConvergence { .. } => 3,
            Error::Resource(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
