//! Stochastic problem instances and their oracle surface.
//!
//! A problem exposes the one-sample stochastic oracle used by the solvers
//! (sampling, stochastic value / gradient / Hessian-vector products, and the
//! log-density derivatives needed in the non-oblivious case) alongside
//! exact-expectation oracles that exist purely for verification. Sampling is
//! the only operation that counts against the oracle-query budget; reusing a
//! drawn outcome for values, gradients, or Hessian products is free.

use crate::linalg::Matrix;
use crate::rng::Rng;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

mod finite_sum;
mod multilinear;
mod nqp;
mod quadratic;

pub use finite_sum::{FiniteSumLogistic, NonconvexSigmoidSum};
pub use multilinear::{SetFunction, SmoothedMultilinear};
pub use nqp::ConcaveNqp;
pub use quadratic::ObliviousQuadratic;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is outside the sampling domain")]
    InfeasiblePoint,
    #[error("oracle does not support {0}")]
    CapabilityMissing(&'static str),
    #[error("outcome has probability zero at this point")]
    ImpossibleOutcome,
    #[error("{what} only supported up to dimension {limit}, got {got}")]
    TooLarge { what: &'static str, limit: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// One stochastic outcome together with the point it was drawn at.
///
/// The birth point matters because in the non-oblivious setting the sampling
/// distribution depends on the decision variable.
#[derive(Clone, Debug)]
pub struct Sample {
    pub payload: Payload,
    pub birth_point: Vec<f64>,
}

/// Problem-specific outcome representation.
#[derive(Clone, Debug)]
pub enum Payload {
    /// Subset of a ground set, encoded as a bitmask (ground sets are small).
    Bits(u32),
    /// Component index of a finite sum.
    Index(usize),
    /// Dense additive-noise vector.
    Vector(Vec<f64>),
}

impl Payload {
    pub fn bits(&self) -> u32 {
        match self {
            Payload::Bits(m) => *m,
            _ => panic!("payload is not a bitmask"),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Payload::Index(i) => *i,
            _ => panic!("payload is not an index"),
        }
    }

    pub fn vector(&self) -> &[f64] {
        match self {
            Payload::Vector(v) => v,
            _ => panic!("payload is not a vector"),
        }
    }
}

/// Certified constants for a problem instance.
///
/// These are the uniform bounds the convergence analysis consumes: `b` bounds
/// the stochastic value, `grad_f` the stochastic gradient norm, `grad_p` the
/// fourth-moment of the score norm, `lip_f`/`lip_p` the spectral norms of the
/// stochastic Hessian and score Hessian, and `second_order` the Lipschitz
/// constant of the stochastic Hessians. They are computed in closed form per
/// instance at construction, never estimated, so the theorem-bound checks
/// stay uncontaminated.
#[derive(Clone, Copy, Debug)]
pub struct ProblemConstants {
    pub b: f64,
    pub grad_f: f64,
    pub grad_p: f64,
    pub lip_f: f64,
    pub lip_p: f64,
    pub second_order: f64,
}

impl ProblemConstants {
    /// `G = max(G_F, G_p)`.
    pub fn g(&self) -> f64 {
        self.grad_f.max(self.grad_p)
    }

    /// `L = max(L_F, L_p)`.
    pub fn l(&self) -> f64 {
        self.lip_f.max(self.lip_p)
    }

    /// Root-mean-square bound on the spectral norm of the one-sample Hessian
    /// estimator; see [`crate::diagnostics::lbar`].
    pub fn lbar(&self) -> f64 {
        crate::diagnostics::lbar(self.b, self.g(), self.l())
    }
}

/// What a problem instance can do.
#[derive(Clone, Copy, Debug)]
pub struct OracleCaps {
    /// Sampling distribution independent of the decision variable.
    pub is_oblivious: bool,
    /// Exact stochastic Hessian-vector products available.
    pub has_exact_hessian: bool,
    /// Closed-form or enumerated expectations available for verification.
    pub has_exact_expectation: bool,
    /// Outcome space finite and enumerable.
    pub z_is_finite: bool,
}

/// Thread-safe sample counter; only `sample` calls increment it.
#[derive(Debug, Default)]
pub struct QueryCounter(AtomicU64);

impl QueryCounter {
    pub fn new() -> Self {
        Self(AtomicU64::new(0))
    }

    pub fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn count(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

/// The stochastic first/second-order oracle surface.
///
/// `value`, `grad`, `hess_vec` evaluate the stochastic function at any point
/// for a fixed outcome; the outcome's own distribution is anchored at its
/// birth point. Exact `exact_*` oracles are for verification only and do not
/// touch the query counter.
pub trait StochasticOracle {
    fn dim(&self) -> usize;

    fn caps(&self) -> OracleCaps;

    fn constants(&self) -> &ProblemConstants;

    /// Cumulative number of `sample` calls on this instance.
    fn queries(&self) -> u64;

    /// Draws one outcome at `x` and counts one oracle query.
    fn sample(&self, x: &[f64], rng: &mut Rng) -> Result<Sample, OracleError>;

    /// Stochastic function value at `x` for outcome `z`.
    fn value(&self, x: &[f64], z: &Sample) -> f64;

    /// Stochastic gradient at `x` for outcome `z`.
    fn grad(&self, x: &[f64], z: &Sample) -> Vec<f64>;

    /// Stochastic Hessian-vector product at `x` for outcome `z`.
    fn hess_vec(&self, x: &[f64], z: &Sample, u: &[f64]) -> Result<Vec<f64>, OracleError> {
        let _ = (x, z, u);
        Err(OracleError::CapabilityMissing("exact Hessian-vector products"))
    }

    /// Gradient of the log sampling density with respect to `x`.
    ///
    /// Identically zero for oblivious problems, which is what the default
    /// provides.
    fn logp_grad(&self, x: &[f64], z: &Sample) -> Result<Vec<f64>, OracleError> {
        let _ = z;
        if self.caps().is_oblivious {
            Ok(vec![0.0; x.len()])
        } else {
            Err(OracleError::CapabilityMissing("log-density gradients"))
        }
    }

    /// Hessian-vector product of the log sampling density.
    fn logp_hess_vec(&self, x: &[f64], z: &Sample, u: &[f64]) -> Result<Vec<f64>, OracleError> {
        let _ = (z, u);
        if self.caps().is_oblivious {
            Ok(vec![0.0; x.len()])
        } else {
            Err(OracleError::CapabilityMissing("log-density Hessians"))
        }
    }

    /// Exact expected value, for verification.
    fn exact_value(&self, x: &[f64]) -> Result<f64, OracleError> {
        let _ = x;
        Err(OracleError::CapabilityMissing("exact expectations"))
    }

    /// Exact expected gradient, for verification.
    fn exact_grad(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        let _ = x;
        Err(OracleError::CapabilityMissing("exact expectations"))
    }

    /// Exact expected Hessian, for verification.
    fn exact_hess(&self, x: &[f64]) -> Result<Matrix, OracleError> {
        let _ = x;
        Err(OracleError::CapabilityMissing("exact Hessians"))
    }

    /// Full outcome enumeration `(probability, sample)` at `x`, when the
    /// outcome space is finite.
    fn outcomes(&self, x: &[f64]) -> Option<Vec<(f64, Sample)>> {
        let _ = x;
        None
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), OracleError> {
    if expected == got {
        Ok(())
    } else {
        Err(OracleError::DimensionMismatch { expected, got })
    }
}
