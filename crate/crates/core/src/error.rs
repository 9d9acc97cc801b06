use thiserror::Error;

/// Errors produced by the measure, hull, projection, lattice and weak-OT routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measure has no atoms")]
    EmptyInput,

    #[error("atom {index} has non-positive weight {weight}")]
    NonPositiveWeight { index: usize, weight: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid exponent p = {0}; expected p >= 1")]
    InvalidP(f64),

    #[error("invalid step function: {0}")]
    InvalidStepFn(String),

    #[error("invalid piecewise-linear function: {0}")]
    InvalidPiecewiseLinear(String),

    #[error("invalid quantile function: {0}")]
    InvalidQuantile(String),

    #[error("barycenters differ: {left} vs {right} (tolerance {tol})")]
    BarycenterMismatch { left: f64, right: f64, tol: f64 },

    #[error("potential slope changes sum to {total}, expected 2")]
    MassMismatch { total: f64 },

    #[error("invalid potential function: {0}")]
    InvalidPotential(String),

    #[error("invalid transport plan: {0}")]
    InvalidPlan(String),

    #[error("no convergence after {iterations} iterations (last decrease {last_decrease:e})")]
    NoConvergence {
        iterations: usize,
        last_decrease: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidP(p))
    }
}
