//! Projection-free stochastic optimization at desk scale.
//!
//! This crate implements the one-sample stochastic Frank-Wolfe family of
//! solvers for constrained convex minimization, smooth non-convex
//! minimization, and monotone continuous DR-submodular maximization, together
//! with the verification instruments needed to check the estimators'
//! unbiasedness and the solvers' convergence rates empirically.
//!
//! The building blocks are:
//!
//! * [`sets`]: compact convex constraint sets with exact linear
//!   minimization/maximization oracles (the only way the solvers touch the
//!   constraints);
//! * [`oracles`]: stochastic problem instances exposing one-sample
//!   first/second-order information plus exact-expectation oracles used only
//!   for verification;
//! * [`estimator`]: the momentum-style gradient surrogate recursions and the
//!   unbiased gradient-variation estimators that correct them;
//! * [`solver`]: the full optimization loops and their step-size schedules;
//! * [`diagnostics`]: Frank-Wolfe gaps, rate fitting, theorem-constant
//!   computation, and brute-force reference optima;
//! * [`acceptance`]: the end-to-end verification suites run by the CLI and
//!   the integration tests.
//!
//! All randomness flows through the deterministic, portable generator in
//! [`rng`], so identical configurations reproduce identical traces.

// Validation sites write `!(x > 0.0)` so that NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod diagnostics;
pub mod estimator;
pub mod linalg;
pub mod oracles;
pub mod rng;
pub mod sets;
pub mod solver;

pub use estimator::{DeltaOption, EstimatorState, MixPoint};
pub use oracles::{OracleCaps, ProblemConstants, Sample, StochasticOracle};
pub use rng::Rng;
pub use sets::{ConstraintSet, Sense};
pub use solver::{Mode, RunResult, SolverConfig, Trace};
