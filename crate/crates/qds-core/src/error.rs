use thiserror::Error;

/// Errors surfaced by the analytic kernels and the protocol pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested configuration admits no solution (e.g. thresholds
    /// incompatible with the channel), regardless of statistics.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Not enough statistics to evaluate a quantity.
    #[error("degenerate statistics: {0}")]
    Degenerate(String),

    /// A decoy-state estimate came out non-physical.
    #[error("estimate invalid: {0}")]
    EstimateInvalid(String),

    /// A numerical routine failed to converge or bracket.
    #[error("solver failure: {0}")]
    Solver(String),

    /// Malformed run configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
}
