use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Branches other than 0 are singular at the origin.
    #[error("lambert branch {n} is undefined at z = 0")]
    InvalidBranch { n: i64 },

    /// Halley iteration did not settle; `last` is the final iterate.
    #[error("lambert iteration on branch {n} did not converge for z = {z} (last iterate {last})")]
    NonConvergence {
        n: i64,
        z: Complex64,
        last: Complex64,
    },

    /// The neglected part of a branch-mode sum exceeds the requested tolerance.
    #[error("branch sum tail estimate {estimate:.3e} exceeds tolerance {tolerance:.3e} at n_max = {n_max}")]
    TruncationNotConverged {
        estimate: f64,
        tolerance: f64,
        n_max: usize,
    },

    /// Frequency quadrature failed to stabilise under refinement.
    #[error("quadrature changed by {change:.3e} under refinement (tolerance {tolerance:.3e})")]
    QuadratureNotConverged { change: f64, tolerance: f64 },

    /// The integration step does not resolve the delay.
    #[error("step {step} exceeds a quarter of the delay {eta}")]
    StepTooLarge { step: f64, eta: f64 },

    /// The requested quantity is infinite for these parameters.
    #[error("divergent: {0}")]
    Divergent(String),

    /// Inconsistent run settings.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

