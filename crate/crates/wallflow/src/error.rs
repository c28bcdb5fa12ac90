//! Error types shared by the solver modules.

use thiserror::Error;

/// Failure modes of the solvers in this crate.
///
/// `InvalidConfig` and `GridMismatch` are rejected before any time stepping;
/// the remaining variants abort a run in progress and carry enough context to
/// identify the failing step.
#[derive(Debug, Error)]
pub enum SolverError {
    /// A configuration value violates a documented invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Initial or boundary data contains NaN or infinity.
    #[error("non-finite input data: {0}")]
    NonFiniteInput(String),

    /// A field became non-finite during time stepping.
    #[error("non-finite value detected at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },

    /// The advective CFL bound was exceeded; the step is refused rather than
    /// silently clamped.
    #[error("CFL violation at step {step}: |u|max*dt/min(dx,dy) = {cfl:.3} >= {limit}")]
    CflViolation { step: usize, cfl: f64, limit: f64 },

    /// A decaying-profile solve lost its decay bound (wall-layer solver).
    #[error(
        "decay violation at step {step}: weighted norm {norm:.3e} exceeds \
         {factor:.0}x the source bound {bound:.3e}; data are incompatible with a decaying profile"
    )]
    DecayViolation {
        step: usize,
        norm: f64,
        bound: f64,
        factor: f64,
    },

    /// Too few samples for a regression or residual report.
    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, SolverError>;
