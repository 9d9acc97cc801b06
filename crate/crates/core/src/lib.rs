//! Wasserstein projections in the convex order for probability measures on
//! the real line.
//!
//! For finitely supported `μ` and `ν` the crate computes
//!
//! - the Wasserstein distance `W_p(μ, ν)` through quantile functions,
//! - whether `μ ≤_c ν` in convex order,
//! - the projections `I(μ, ν)` (closest measure to `μ` dominated by `ν`) and
//!   `J(μ, ν)` (closest measure to `ν` dominating `μ`),
//! - the minimum and maximum in convex order of two measures with a common
//!   barycenter, via potential functions,
//! - an independent weak optimal transport solver for cross-checking `I`.
//!
//! ```rust
//! use wproj::{project_i, wasserstein, DiscreteMeasure};
//!
//! let mu = DiscreteMeasure::dirac(0.0);
//! let nu = DiscreteMeasure::from_atoms([(-0.25, 0.5), (1.0, 0.5)]).unwrap();
//! let proj = project_i(&mu, &nu, 1.0).unwrap();
//! assert!(proj.projected.approx_eq(&DiscreteMeasure::dirac(0.375), 1e-12));
//! assert!((wasserstein(&mu, &nu, 1.0).unwrap() - 0.625).abs() < 1e-12);
//! ```
//!
//! Continuous measures with piecewise-linear quantile functions enter through
//! [`GeneralQuantile::discretize`].

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod hull;
pub mod io;
pub mod lattice;
pub mod measures;
pub mod projection;
pub mod random;
pub mod replay;
pub mod weakot;

pub use error::{Error, Result};
pub use hull::{PiecewiseLinearFn, StepFn, Vertex};
pub use lattice::{
    lattice_ratio, max_convex, measure_from_potential, min_convex, potential, sandwich_check,
    PotentialFn,
};
pub use measures::{
    discretize, Atom, DiscreteMeasure, GeneralQuantile, QuantilePiece, StepQuantile,
};
pub use projection::{
    equaldist_check, is_convex_order, lipschitz_audit, project_i, project_j, projections,
    wasserstein, EqualDistances, LipschitzReport, ProjectionResult, ORDER_TOL,
};
pub use weakot::{
    plan_barycenter_pushforward, solve_weak_ot, weak_ot_value, TransportPlan, WeakOtOptions,
};
