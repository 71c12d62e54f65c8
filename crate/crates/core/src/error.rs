//! Shared error type for the numerical kernels.

use thiserror::Error;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the routine.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// Adaptive quadrature ran out of refinement budget before meeting
    /// the requested tolerance.
    #[error("quadrature did not converge in {what}: residual error {residual:.3e} over budget")]
    NoConvergence { what: &'static str, residual: f64 },

    /// The order parameter q violates the integrability restriction of the
    /// test-function family.
    #[error("inadmissible order q = {q}: requires q > -min(mu,1) = {min_bound} and q > -mu/2 = {half_bound}")]
    InadmissibleQ {
        q: f64,
        min_bound: f64,
        half_bound: f64,
    },

    /// Initial ordering of a comparison problem is violated.
    #[error("comparison precondition violated: {0}")]
    InvalidComparison(String),

    /// The parameter ordering c0 << s0 << 1/delta fails at the configured ratios.
    #[error("Riccati parameter ordering violated: {0}")]
    OrderingViolation(String),

    /// A solver configuration is internally inconsistent.
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    /// The input grid does not cover the support of the solution.
    #[error("grid coverage error: {0}")]
    GridCoverage(String),

    /// Too few usable samples for a requested reduction.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}

/// Convenience result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
