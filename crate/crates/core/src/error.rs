use thiserror::Error;

/// Errors raised anywhere in the simulation and analysis stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unknown spin `{0}`")]
    UnknownSpin(String),

    #[error("spin `{0}` has an unpolarized nuclear manifold; pick `up` or `down`")]
    UnresolvedManifold(String),

    #[error("no dipolar coupling between `{0}` and `{1}`")]
    MissingCoupling(String, String),

    #[error("spin `{spin}` has no `{budget}` coherence budget")]
    MissingBudget { spin: String, budget: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("expectation value has imaginary residue {0:e}")]
    ComplexExpectation(f64),

    #[error("fit did not converge after {iterations} iterations (residual norm {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("spectrum has no peak above the DC floor")]
    NoPeak,

    /// A configuration file failed to parse or validate.
    #[error("{file}: {message}")]
    Schema { file: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
