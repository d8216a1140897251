//! Robust estimation with the Geman-McClure loss via fractional programming.
//!
//! The Geman-McClure problem `min Σ c² r_i²/(r_i² + c²)` is a sum of ratios.
//! With auxiliary variables `β` (ratio values) and `μ` (inverse denominators)
//! it becomes an alternation between a closed-form auxiliary update and a
//! convex weighted quadratic, which [`fracgm_solve`] runs to a root of the
//! stacked optimality system.
//!
//! [`geometry`] builds rotation (`d = 10`) and registration (`d = 13`)
//! instances from point correspondences, [`baselines`] holds weighted least
//! squares and graduated non-convexity for comparison, and [`synthetic`]
//! generates seeded outlier-contaminated scenes.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common case.

pub mod baselines;
pub mod error;
pub mod geometry;
pub mod problem;
pub mod scalar;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
pub use problem::{AuxiliaryVariables, GemanMcClureProblem, QuadraticTerm};
pub use scalar::Real;
pub use solver::{
    fracgm_solve, gm_cost, psi_norm, solve_weighted_quadratic, update_auxiliary,
    IterationRecord, SolverConfig, SolverDiagnostics, SolverResult,
};

pub type Problem = GemanMcClureProblem<f64>;
pub type Term = QuadraticTerm<f64>;
pub type Aux = AuxiliaryVariables<f64>;
pub type Config = SolverConfig<f64>;
pub type Solution = SolverResult<f64>;
pub type Transform = geometry::RigidTransform<f64>;
pub type Correspondences = geometry::PointCorrespondences<f64>;
pub type Scene = synthetic::SyntheticScene<f64>;
pub type GncOptions = baselines::GncConfig<f64>;

pub type Problem32 = GemanMcClureProblem<f32>;
pub type Config32 = SolverConfig<f32>;
pub type Transform32 = geometry::RigidTransform<f32>;
pub type Correspondences32 = geometry::PointCorrespondences<f32>;
