//! Error type shared by problem construction, schedules, solvers, and
//! stationarity measures.

use thiserror::Error;

/// Errors reported by this crate.
///
/// Contract violations with no data-dependent cause (nonpositive prox step,
/// empty minibatch, mismatched dimensions) panic instead; every variant here
/// describes a condition a correct caller can still run into.
#[derive(Debug, Error)]
pub enum MinimaxError {
    /// A stepsize schedule needs a constant the problem reports as infinite
    /// or otherwise unusable.
    #[error("schedule {schedule} requires {requirement}, but the problem reports {found}")]
    ScheduleUnavailable {
        schedule: &'static str,
        requirement: &'static str,
        found: String,
    },

    /// An operation needs strong concavity in the second argument.
    #[error("{operation} requires strong concavity (mu > 0); problem has mu = 0")]
    RequiresStrongConcavity { operation: &'static str },

    /// Best-response computation needs either strong concavity or a bounded
    /// second-player domain for a maximizer to exist.
    #[error("best response undefined: problem has mu = 0 and unbounded second-player domain")]
    BestResponseUnavailable,

    /// Moreau envelope parameter outside the admissible open interval.
    #[error("moreau parameter lambda = {lambda} outside (0, {limit}) for weak-convexity modulus rho = {rho}")]
    InvalidMoreauParameter { lambda: f64, limit: f64, rho: f64 },

    /// An inner solve (best response or envelope prox point) did not reach
    /// its tolerance within the iteration cap.
    #[error("{context}: residual {residual:.3e} above tolerance {tol:.3e} after {iters} iterations")]
    InnerNotConverged {
        context: &'static str,
        tol: f64,
        residual: f64,
        iters: usize,
    },

    /// A nonfinite value surfaced where a finite one is required.
    #[error("nonfinite value encountered in {context}")]
    NonFinite { context: &'static str },

    /// Invalid problem data or configuration.
    #[error("{0}")]
    Invalid(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, MinimaxError>;
