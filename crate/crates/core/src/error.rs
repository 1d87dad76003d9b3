//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by metric, contraction, iteration, and solver operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two points do not live on the same domain descriptor
    /// (different grids, different vector lengths, or different variants).
    #[error("mismatched domain: {0}")]
    MismatchedDomain(String),

    /// A sample, coordinate, or computed value is NaN or infinite.
    #[error("non-finite value at {0}")]
    NonFinite(String),

    /// An operator raised an error while being evaluated.
    #[error("operator failure: {0}")]
    OperatorFailure(String),

    /// Tuple shape or length does not match the contraction kind.
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    /// A Geraghty-function sample fell outside [0, 1).
    #[error("beta out of range: beta({t}) = {value}")]
    OutOfRange { t: f64, value: f64 },

    /// Iteration step distance exceeded the divergence guard or went non-finite.
    #[error("diverged at iteration {iteration}: step distance {step}")]
    Diverged { iteration: usize, step: f64 },

    /// A trace is too short for the requested diagnostics.
    #[error("insufficient trace: need at least {needed} step distances, have {have}")]
    InsufficientTrace { needed: usize, have: usize },

    /// A solver hypothesis failed its pre-scan and `force` was not set.
    #[error("hypothesis violated: {condition} (worst observed value {worst})")]
    HypothesisViolated { condition: String, worst: f64 },

    /// The dense collocation system could not be solved.
    #[error("singular collocation system (condition estimate {cond_estimate:.3e})")]
    SingularSystem { cond_estimate: f64 },

    /// Total collocation nodes exceed the dense-solve cap.
    #[error("node cap exceeded: {nodes} nodes > cap {cap}")]
    CapExceeded { nodes: usize, cap: usize },

    /// A constructor argument violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
