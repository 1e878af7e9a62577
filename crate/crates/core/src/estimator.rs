//! Gradient surrogates and gradient-variation estimators.
//!
//! The solvers maintain a running surrogate `d_t` for the exact gradient.
//! The plain momentum recursion `d_t = (1-rho_t) d_{t-1} + rho_t g_t` has low
//! variance but is biased; adding an unbiased estimate of the gradient
//! variation `Delta_t = grad F(x_t) - grad F(x_{t-1})` to the carried term
//! removes the bias:
//!
//! ```text
//! d_t = (1 - rho_t) (d_{t-1} + Delta~_t) + rho_t grad F~(x_t; z_t)
//! ```
//!
//! In the non-oblivious setting `Delta~_t` comes from a one-sample estimate
//! of the Hessian at a uniformly mixed point `x_t(a) = a x_t + (1-a)
//! x_{t-1}`, applied to `u_t = x_t - x_{t-1}`. The Hessian estimate itself
//! combines the stochastic Hessian with log-density (score) terms so that
//! its expectation over the sampling distribution is the exact Hessian:
//!
//! ```text
//! H~ = F~ s s' + hess F~ + (grad F~) s' + F~ hesslog p + s (grad F~)'
//! ```
//!
//! with `s = grad log p(z; x)`. When exact stochastic Hessians are not
//! available, both Hessian applications are replaced by central differences
//! of gradients at `x +- delta u`. In the oblivious setting the much simpler
//! difference of stochastic gradients at the same outcome is already
//! unbiased.

use crate::linalg::{self, dot};
use crate::oracles::{OracleError, ProblemConstants, Sample, StochasticOracle};
use crate::rng::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("averaging weight must lie in [0, 1], got {0}")]
    BadWeight(f64),
    #[error("difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Fallback difference step for problems whose stochastic Hessians do not
/// vary at all (`L_2 = 0`); any step is exact there.
pub const FALLBACK_DIFF_STEP: f64 = 1e-4;

/// Running state of the gradient surrogate.
#[derive(Clone, Debug)]
pub struct EstimatorState {
    /// Current surrogate `d_t`.
    pub surrogate: Vec<f64>,
    /// Previous iterate `x_{t-1}`, needed to form the next variation
    /// estimate. The solver refreshes it when the iterate advances.
    pub x_prev: Vec<f64>,
    /// Iteration counter; increments by exactly one per update.
    pub t: u64,
}

impl EstimatorState {
    /// Initial state: `d_1` is the raw stochastic gradient at the start.
    pub fn new(initial_surrogate: Vec<f64>, x1: Vec<f64>) -> Self {
        debug_assert_eq!(initial_surrogate.len(), x1.len());
        Self { surrogate: initial_surrogate, x_prev: x1, t: 1 }
    }
}

/// How the gradient variation is estimated.
#[derive(Clone, Debug, PartialEq)]
pub enum DeltaOption {
    /// Exact stochastic Hessian-vector products.
    ExactHessian,
    /// Central gradient differences in place of Hessian products.
    GradientDifference(StepRule),
    /// Same-outcome gradient difference; unbiased only when the sampling
    /// distribution ignores the decision variable.
    ObliviousDifference,
}

impl DeltaOption {
    pub fn label(&self) -> &'static str {
        match self {
            DeltaOption::ExactHessian => "exact_hessian",
            DeltaOption::GradientDifference(_) => "gradient_difference",
            DeltaOption::ObliviousDifference => "oblivious_difference",
        }
    }
}

/// Difference-step schedule for [`DeltaOption::GradientDifference`].
#[derive(Clone, Debug, PartialEq)]
pub enum StepRule {
    /// `delta_t = sqrt(3) eta_{t-1} Lbar / (D L_2 (1 + B))`, the largest
    /// step whose approximation error stays below the variation estimate's
    /// own statistical error. Falls back to [`FALLBACK_DIFF_STEP`] when
    /// `L_2 = 0`.
    Analytic,
    Fixed(f64),
}

impl StepRule {
    pub fn step(&self, eta_prev: f64, constants: &ProblemConstants, diameter: f64) -> f64 {
        match self {
            StepRule::Fixed(v) => *v,
            StepRule::Analytic => {
                let l2 = constants.second_order;
                if l2 == 0.0 || diameter == 0.0 {
                    FALLBACK_DIFF_STEP
                } else {
                    3.0_f64.sqrt() * eta_prev * constants.lbar()
                        / (diameter * l2 * (1.0 + constants.b))
                }
            }
        }
    }
}

/// A point on the segment between the current and previous iterate,
/// `x_t(a) = a x_t + (1-a) x_{t-1}`. Feasible whenever both endpoints are,
/// by convexity.
#[derive(Clone, Debug)]
pub struct MixPoint {
    pub a: f64,
    pub point: Vec<f64>,
}

impl MixPoint {
    pub fn at(a: f64, x_t: &[f64], x_prev: &[f64]) -> Self {
        debug_assert_eq!(x_t.len(), x_prev.len());
        let point = x_t.iter().zip(x_prev).map(|(c, p)| a * c + (1.0 - a) * p).collect();
        Self { a, point }
    }

    /// Draws `a` uniformly on `[0, 1]`.
    pub fn draw(rng: &mut Rng, x_t: &[f64], x_prev: &[f64]) -> Self {
        Self::at(rng.uniform(), x_t, x_prev)
    }
}

/// One-sample Hessian estimate applied to a vector.
///
/// With `s = grad log p(z; x)`, `g = grad F~(x; z)`, `f = F~(x; z)`:
///
/// ```text
/// f (s'u) s  +  hess F~ u  +  (s'u) g  +  f (hesslog p) u  +  (g'u) s
/// ```
///
/// Averaged over the sampling distribution at `x`, this equals the exact
/// Hessian of the expected objective applied to `u`; outcome reuse means it
/// costs no extra oracle queries. For oblivious problems the score terms
/// vanish and the expression collapses to the plain stochastic
/// Hessian-vector product.
pub fn hessian_estimate_vecprod<O: StochasticOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    z: &Sample,
    u: &[f64],
) -> Result<Vec<f64>, EstimatorError> {
    if x.len() != u.len() {
        return Err(EstimatorError::DimensionMismatch { expected: x.len(), got: u.len() });
    }
    let s = oracle.logp_grad(x, z)?;
    let g = oracle.grad(x, z);
    let f = oracle.value(x, z);
    let su = dot(&s, u);
    let gu = dot(&g, u);
    let mut out = oracle.hess_vec(x, z, u)?;
    linalg::axpy(&mut out, f * su, &s);
    linalg::axpy(&mut out, su, &g);
    let lp = oracle.logp_hess_vec(x, z, u)?;
    linalg::axpy(&mut out, f, &lp);
    linalg::axpy(&mut out, gu, &s);
    Ok(out)
}

/// Central-difference Hessian-vector product:
/// `[grad psi(x + delta u) - grad psi(x - delta u)] / (2 delta)`.
///
/// When `psi` has an `L_2`-Lipschitz Hessian and `||u|| <= D`, the error
/// against the true product is at most `D^2 L_2 delta`.
pub fn fd_hvp(
    grad_at: impl Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    u: &[f64],
    step: f64,
) -> Result<Vec<f64>, EstimatorError> {
    if !(step > 0.0) {
        return Err(EstimatorError::BadStep(step));
    }
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    linalg::axpy(&mut xp, step, u);
    linalg::axpy(&mut xm, -step, u);
    let gp = grad_at(&xp);
    let gm = grad_at(&xm);
    Ok(gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * step)).collect())
}

/// Gradient-variation estimate via the exact-Hessian route: the one-sample
/// Hessian estimate at the mixed point, applied to `x_t - x_{t-1}`.
pub fn delta_exact<O: StochasticOracle + ?Sized>(
    oracle: &O,
    x_t: &[f64],
    state: &EstimatorState,
    mix: &MixPoint,
    z: &Sample,
) -> Result<Vec<f64>, EstimatorError> {
    let u = linalg::sub(x_t, &state.x_prev);
    hessian_estimate_vecprod(oracle, &mix.point, z, &u)
}

/// Gradient-variation estimate via gradient differences: the same five-term
/// expression with both Hessian applications replaced by central
/// differences of the stochastic gradient and of the score at step `step`.
pub fn delta_graddiff<O: StochasticOracle + ?Sized>(
    oracle: &O,
    x_t: &[f64],
    state: &EstimatorState,
    mix: &MixPoint,
    z: &Sample,
    step: f64,
) -> Result<Vec<f64>, EstimatorError> {
    if !(step > 0.0) {
        return Err(EstimatorError::BadStep(step));
    }
    let x = &mix.point;
    let u = linalg::sub(x_t, &state.x_prev);
    let s = oracle.logp_grad(x, z)?;
    let g = oracle.grad(x, z);
    let f = oracle.value(x, z);
    let su = dot(&s, &u);
    let gu = dot(&g, &u);

    let mut xp = x.clone();
    let mut xm = x.clone();
    linalg::axpy(&mut xp, step, &u);
    linalg::axpy(&mut xm, -step, &u);

    // phi(step; F~): replaces the stochastic Hessian product.
    let gp = oracle.grad(&xp, z);
    let gm = oracle.grad(&xm, z);
    let mut out: Vec<f64> =
        gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * step)).collect();

    // phi(step; log p): replaces the score Hessian product.
    let sp = oracle.logp_grad(&xp, z)?;
    let sm = oracle.logp_grad(&xm, z)?;
    for i in 0..out.len() {
        out[i] += f * (sp[i] - sm[i]) / (2.0 * step);
    }

    linalg::axpy(&mut out, f * su, &s);
    linalg::axpy(&mut out, su, &g);
    linalg::axpy(&mut out, gu, &s);
    Ok(out)
}

/// Gradient-variation estimate for oblivious problems: the difference of
/// stochastic gradients at the two iterates under the same outcome.
pub fn delta_oblivious<O: StochasticOracle + ?Sized>(
    oracle: &O,
    x_t: &[f64],
    x_prev: &[f64],
    z: &Sample,
) -> Result<Vec<f64>, EstimatorError> {
    if !oracle.caps().is_oblivious {
        return Err(EstimatorError::Oracle(OracleError::CapabilityMissing(
            "decision-independent sampling",
        )));
    }
    Ok(linalg::sub(&oracle.grad(x_t, z), &oracle.grad(x_prev, z)))
}

/// Variation-corrected surrogate update:
/// `d_t = (1 - rho) (d_{t-1} + delta) + rho g`.
pub fn update(
    state: EstimatorState,
    rho: f64,
    delta: &[f64],
    g: &[f64],
) -> Result<EstimatorState, EstimatorError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(EstimatorError::BadWeight(rho));
    }
    let dim = state.surrogate.len();
    if delta.len() != dim || g.len() != dim {
        return Err(EstimatorError::DimensionMismatch {
            expected: dim,
            got: delta.len().min(g.len()),
        });
    }
    let surrogate = state
        .surrogate
        .iter()
        .zip(delta.iter().zip(g))
        .map(|(d, (dl, gi))| (1.0 - rho) * (d + dl) + rho * gi)
        .collect();
    Ok(EstimatorState { surrogate, x_prev: state.x_prev, t: state.t + 1 })
}

/// Plain momentum update (the baseline): `d_t = (1 - rho) d_{t-1} + rho g`.
pub fn momentum_update(
    state: EstimatorState,
    rho: f64,
    g: &[f64],
) -> Result<EstimatorState, EstimatorError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(EstimatorError::BadWeight(rho));
    }
    let dim = state.surrogate.len();
    if g.len() != dim {
        return Err(EstimatorError::DimensionMismatch { expected: dim, got: g.len() });
    }
    let surrogate = state
        .surrogate
        .iter()
        .zip(g)
        .map(|(d, gi)| (1.0 - rho) * d + rho * gi)
        .collect();
    Ok(EstimatorState { surrogate, x_prev: state.x_prev, t: state.t + 1 })
}
