use thiserror::Error;

/// Errors raised by the estimators, the simulator and the planner.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid (n, r, k) combination.
    #[error("invalid spacing query: {0}")]
    InvalidQuery(String),

    /// Density model parameters violate the model constraints.
    #[error("invalid density model: {0}")]
    InvalidModel(String),

    /// Input points were expected sorted.
    #[error(
        "input points are not sorted in nondecreasing order (first violation at index {index})"
    )]
    Unsorted { index: usize },

    /// The exact r=1 formula was asked for a sample size where the
    /// alternating binomial sum cannot be evaluated reliably.
    #[error(
        "exact maximal-spacing CDF refused for n = {n} (limit {limit}): the alternating binomial sum \
         suffers catastrophic cancellation; use an approximation instead"
    )]
    ExactUnstable { n: u64, limit: u64 },

    /// The hypotheses of an approximation are violated by the model.
    #[error("approximation not applicable: {0}")]
    NotApplicable(String),

    /// A root could not be bracketed.
    #[error("failed to bracket root: {0}")]
    Bracket(String),

    /// An iterative solver ran out of iterations.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Configuration file problems.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
