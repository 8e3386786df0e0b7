use thiserror::Error;

/// Errors raised by the queue analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root solver: {0}")]
    RootSolver(String),

    #[error("oracle did not converge after {periods} periods (last residual {residual:.3e})")]
    NotConverged { periods: usize, residual: f64 },

    #[error("level truncation too small: {0}")]
    Truncation(String),

    #[error("singular denominator: {0}")]
    Singular(String),

    #[error("unstable step: {0}")]
    Unstable(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
