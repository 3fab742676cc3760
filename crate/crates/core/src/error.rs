use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum HnsError {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke an input contract (missing data, mismatched lengths).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The adaptive oracle quadrature ran out of budget.
    #[error("oracle quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    OracleNonConvergence { estimate: f64, error: f64 },

    /// The per-step linear equation of the L1 time march is singular.
    #[error("singular step coefficient at step {step}")]
    SingularStep { step: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HnsError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(HnsError::Domain(msg.into()))
}
