//! Verification instruments: gaps, rate fits, theorem constants, frozen-path
//! bias measurements, and brute-force reference optima.
//!
//! Everything here exists to check the solvers and estimators against
//! independent computations; none of it is on the optimization path and none
//! of it consumes oracle queries.

use crate::estimator::{self, DeltaOption, EstimatorState, MixPoint};
use crate::linalg::{self, dot};
use crate::oracles::{OracleError, StochasticOracle};
use crate::rng::Rng;
use crate::sets::{ConstraintSet, Sense, SetError, SetKind};
use crate::solver::{rho_schedule, Mode, SolverError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("rate fits need strictly positive values; found {0}")]
    NonPositiveValue(f64),
    #[error("rate fits need at least two points in the window")]
    WindowTooSmall,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{what} only supported up to dimension {limit}, got {got}")]
    TooLarge { what: &'static str, limit: usize, got: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Solver(#[from] Box<SolverError>),
    #[error(transparent)]
    Estimator(#[from] estimator::EstimatorError),
}

impl From<SolverError> for DiagnosticsError {
    fn from(e: SolverError) -> Self {
        DiagnosticsError::Solver(Box::new(e))
    }
}

/// Root-mean-square bound on the spectral norm of the one-sample Hessian
/// estimator, `sqrt(4 B^2 G^4 + 16 G^4 + 4 L^2 + 4 B^2 L^2)`.
///
/// The square root makes the constant simultaneously usable as a
/// second-moment certificate and as the smoothness constant of the expected
/// objective, which is how the convergence bounds consume it.
pub fn lbar(b: f64, g: f64, l: f64) -> f64 {
    let g4 = g.powi(4);
    (4.0 * b * b * g4 + 16.0 * g4 + 4.0 * l * l + 4.0 * b * b * l * l).sqrt()
}

/// The variance-decay constant `C` for `E ||grad F(x_t) - d_t||^2 <= C
/// t^{-alpha}`.
///
/// `size` is the set diameter for minimization runs and the set radius for
/// continuous-greedy runs (whose steps are bounded by `eta R` rather than
/// `eta D`). The gradient-difference route pays a constant-factor premium;
/// the oblivious route satisfies the exact-Hessian bound because the
/// same-outcome difference is `L`-Lipschitz and `lbar >= 2L` always.
pub fn theorem_constant(
    alpha: f64,
    size: f64,
    g: f64,
    lbar: f64,
    l: f64,
    option: &DeltaOption,
) -> f64 {
    let h = 2.0 - 2.0_f64.powf(-alpha) - alpha;
    let second = (2.0 / h).powi(4);
    match option {
        DeltaOption::ExactHessian | DeltaOption::ObliviousDifference => {
            let first = 2.0 * (2.0 * g + size * lbar).powi(2) / h;
            let third = (2.0 * size * (lbar + l)).powi(4);
            first.max(second).max(third)
        }
        DeltaOption::GradientDifference(_) => {
            let first = 8.0 * (size * size * lbar * lbar + g * g + g * size * lbar) / h;
            let third = (4.0 * size * (lbar + l)).powi(4);
            first.max(second).max(third)
        }
    }
}

/// Frank-Wolfe gap `max_{v in K} <v - x, -grad>` given the exact gradient,
/// via a single LMO call.
pub fn fw_gap_from_grad(grad: &[f64], set: &ConstraintSet, x: &[f64]) -> Result<f64, SetError> {
    let v = set.lmo(grad, Sense::Minimize)?;
    Ok(dot(x, grad) - dot(&v, grad))
}

/// Frank-Wolfe gap with the gradient supplied as a function.
pub fn fw_gap(
    exact_grad_at: impl Fn(&[f64]) -> Vec<f64>,
    set: &ConstraintSet,
    x: &[f64],
) -> Result<f64, SetError> {
    fw_gap_from_grad(&exact_grad_at(x), set, x)
}

/// Least-squares fit of `log(value)` against `log(t)`.
#[derive(Clone, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Fits the decay exponent of a positive series over a `t` window
/// (inclusive). Points outside the window are ignored.
pub fn rate_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit, DiagnosticsError> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .copied()
        .collect();
    if pts.len() < 2 {
        return Err(DiagnosticsError::WindowTooSmall);
    }
    let mut logs = Vec::with_capacity(pts.len());
    for (t, v) in &pts {
        if !(*v > 0.0) || !(*t > 0.0) {
            return Err(DiagnosticsError::NonPositiveValue(*v));
        }
        logs.push((t.ln(), v.ln()));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|(a, _)| a).sum::<f64>() / n;
    let my = logs.iter().map(|(_, b)| b).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|(a, _)| (a - mx) * (a - mx)).sum();
    let sxy: f64 = logs.iter().map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(DiagnosticsError::WindowTooSmall);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = logs.iter().map(|(_, b)| (b - my) * (b - my)).sum();
    let ss_res: f64 =
        logs.iter().map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit { slope, intercept, r_squared, window })
}

/// Componentwise bias measurement of the surrogate recursion replayed along
/// a fixed path.
#[derive(Clone, Debug)]
pub struct FrozenPathReport {
    /// `mean(d_final) - grad F(x_final)` per coordinate.
    pub mean_deviation: Vec<f64>,
    /// Standard error of each coordinate's mean.
    pub std_error: Vec<f64>,
}

impl FrozenPathReport {
    /// Largest deviation measured in units of its own standard error.
    pub fn max_deviation_in_se(&self) -> f64 {
        self.mean_deviation
            .iter()
            .zip(&self.std_error)
            .map(|(d, se)| d.abs() / se.max(1e-300))
            .fold(0.0, f64::max)
    }
}

/// Replays the corrected recursion `reps` times along a fixed iterate path
/// with fresh randomness each step and reports the final surrogate's mean
/// deviation from the exact gradient.
///
/// With the one-sample coupling the momentum term is evaluated at the
/// current path point using an outcome drawn at the mixed point, so for
/// non-oblivious problems this is a bias measurement rather than an exact
/// zero check; for oblivious problems the deviation is pure Monte Carlo
/// noise. The replay uses the unit averaging exponent.
pub fn frozen_path_unbiasedness<O: StochasticOracle + ?Sized>(
    oracle: &O,
    path: &[Vec<f64>],
    reps: usize,
    option: &DeltaOption,
    rng: &mut Rng,
) -> Result<FrozenPathReport, DiagnosticsError> {
    if path.is_empty() || reps == 0 {
        return Err(DiagnosticsError::Unsupported("empty path or no replications".into()));
    }
    let dim = oracle.dim();
    let exact = oracle.exact_grad(path.last().unwrap())?;
    let path_diameter = path
        .iter()
        .enumerate()
        .flat_map(|(i, a)| path.iter().skip(i + 1).map(move |b| linalg::norm(&linalg::sub(a, b))))
        .fold(0.0, f64::max)
        .max(1e-12);

    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    for _ in 0..reps {
        let z1 = oracle.sample(&path[0], rng)?;
        let mut state = EstimatorState::new(oracle.grad(&path[0], &z1), path[0].clone());
        for (k, x_t) in path.iter().enumerate().skip(1) {
            let t = (k + 1) as u64;
            let rho = rho_schedule(t, 1.0)?;
            let (delta, g) = match option {
                DeltaOption::ObliviousDifference => {
                    let z = oracle.sample(x_t, rng)?;
                    let delta = estimator::delta_oblivious(oracle, x_t, &state.x_prev, &z)?;
                    (delta, oracle.grad(x_t, &z))
                }
                DeltaOption::ExactHessian => {
                    let mix = MixPoint::draw(rng, x_t, &state.x_prev);
                    let z = oracle.sample(&mix.point, rng)?;
                    let delta = estimator::delta_exact(oracle, x_t, &state, &mix, &z)?;
                    (delta, oracle.grad(x_t, &z))
                }
                DeltaOption::GradientDifference(rule) => {
                    let mix = MixPoint::draw(rng, x_t, &state.x_prev);
                    let z = oracle.sample(&mix.point, rng)?;
                    let step = rule.step(
                        ((t - 1) as f64).powf(-1.0),
                        oracle.constants(),
                        path_diameter,
                    );
                    let delta = estimator::delta_graddiff(oracle, x_t, &state, &mix, &z, step)?;
                    (delta, oracle.grad(x_t, &z))
                }
            };
            state = estimator::update(state, rho, &delta, &g)?;
            state.x_prev = x_t.clone();
        }
        for i in 0..dim {
            let d = state.surrogate[i];
            sum[i] += d;
            sum_sq[i] += d * d;
        }
    }
    let n = reps as f64;
    let mean_deviation: Vec<f64> = (0..dim).map(|i| sum[i] / n - exact[i]).collect();
    let std_error: Vec<f64> = (0..dim)
        .map(|i| {
            let var = (sum_sq[i] / n - (sum[i] / n).powi(2)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    Ok(FrozenPathReport { mean_deviation, std_error })
}

/// Outcome of a brute-force reference solve.
#[derive(Clone, Debug)]
pub struct OptResult {
    pub value: f64,
    pub point: Vec<f64>,
    /// Frank-Wolfe gap certificate at the returned point, when the exact
    /// gradient was available to compute it.
    pub certified_gap: Option<f64>,
}

/// Dimension cap for the quadratic-over-simplex face enumeration.
pub const CONVEX_OPT_MAX_DIM: usize = 12;
/// Dimension cap for the grid-refinement maximizer.
pub const SUBMODULAR_OPT_MAX_DIM: usize = 4;

/// Independent reference optimum for small problems.
///
/// * Convex minimization: exact face enumeration for quadratic objectives
///   over the scaled simplex (KKT systems on every support set), certified
///   by a Frank-Wolfe gap at the solution.
/// * DR-submodular maximization: multi-resolution grid search down to a
///   `1e-3` resolution followed by local polishing with single and pairwise
///   coordinate moves, which is exact for concave objectives.
///
/// Dimension limits are deliberate; this is a verification oracle, not a
/// solver.
pub fn brute_force_opt<O: StochasticOracle + ?Sized>(
    oracle: &O,
    set: &ConstraintSet,
    mode: Mode,
) -> Result<OptResult, DiagnosticsError> {
    match mode {
        Mode::ConvexMin => quadratic_simplex_min(oracle, set),
        Mode::SubmodularMax => grid_refine_max(oracle, set),
        Mode::NonconvexMin => Err(DiagnosticsError::Unsupported(
            "no brute-force reference for non-convex minimization; use the Frank-Wolfe gap".into(),
        )),
    }
}

fn quadratic_simplex_min<O: StochasticOracle + ?Sized>(
    oracle: &O,
    set: &ConstraintSet,
) -> Result<OptResult, DiagnosticsError> {
    let scale = match set.kind() {
        SetKind::UnitSimplex { scale } => *scale,
        other => {
            return Err(DiagnosticsError::Unsupported(format!(
                "convex reference solve only implemented over the simplex, got {other:?}"
            )));
        }
    };
    let dim = set.dim();
    if dim > CONVEX_OPT_MAX_DIM {
        return Err(DiagnosticsError::TooLarge {
            what: "convex reference solve",
            limit: CONVEX_OPT_MAX_DIM,
            got: dim,
        });
    }
    let origin = vec![0.0; dim];
    let hess = oracle.exact_hess(&origin)?;
    // The face enumeration assumes a quadratic objective; verify the
    // Hessian really is constant before trusting it.
    let probe = vec![scale / dim as f64; dim];
    if oracle.exact_hess(&probe)?.max_abs_diff(&hess) > 1e-9 {
        return Err(DiagnosticsError::Unsupported(
            "convex reference solve requires a quadratic objective".into(),
        ));
    }
    let lin = oracle.exact_grad(&origin)?;

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << dim) {
        let support: Vec<usize> = (0..dim).filter(|i| mask & (1 << i) != 0).collect();
        let m = support.len();
        // KKT system on the face: stationarity over the support plus the
        // budget equality.
        let mut a = vec![vec![0.0; m + 1]; m + 1];
        let mut rhs = vec![0.0; m + 1];
        for (r, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                a[r][c] = hess.get(i, j);
            }
            a[r][m] = 1.0;
            rhs[r] = -lin[i];
        }
        for slot in a[m].iter_mut().take(m) {
            *slot = 1.0;
        }
        rhs[m] = scale;
        let Some(sol) = solve_dense(&mut a, &mut rhs) else { continue };
        if sol[..m].iter().any(|v| *v < -1e-10) {
            continue;
        }
        let mut x = vec![0.0; dim];
        for (r, &i) in support.iter().enumerate() {
            x[i] = sol[r].max(0.0);
        }
        let value = oracle.exact_value(&x)?;
        if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
            best = Some((value, x));
        }
    }
    let (value, point) =
        best.ok_or_else(|| DiagnosticsError::Unsupported("no feasible face solution".into()))?;
    let gap = fw_gap_from_grad(&oracle.exact_grad(&point)?, set, &point)?;
    Ok(OptResult { value, point, certified_gap: Some(gap) })
}

/// Gaussian elimination with partial pivoting; `None` on (near-)singular
/// systems, whose faces are simply skipped.
fn solve_dense(a: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r1, &r2| {
            a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let pivot_row = a[col].clone();
        for row in (col + 1)..n {
            let f = a[row][col] / pivot_row[col];
            for (slot, pv) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *slot -= f * pv;
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in (row + 1)..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn grid_refine_max<O: StochasticOracle + ?Sized>(
    oracle: &O,
    set: &ConstraintSet,
) -> Result<OptResult, DiagnosticsError> {
    let dim = set.dim();
    if dim > SUBMODULAR_OPT_MAX_DIM {
        return Err(DiagnosticsError::TooLarge {
            what: "grid-refinement maximizer",
            limit: SUBMODULAR_OPT_MAX_DIM,
            got: dim,
        });
    }
    // Per-axis bounding box from the LMO itself.
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        lo[i] = set.lmo(&e, Sense::Minimize)?[i];
        hi[i] = set.lmo(&e, Sense::Maximize)?[i];
    }
    let max_range = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    if max_range <= 0.0 {
        return Err(DiagnosticsError::Unsupported("degenerate bounding box".into()));
    }

    // Coarse pass over the bounding box, feasibility-filtered.
    let coarse = 12usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; dim];
    loop {
        let x: Vec<f64> =
            (0..dim).map(|i| lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / coarse as f64).collect();
        if set.contains(&x, 1e-9) {
            let v = oracle.exact_value(&x)?;
            if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                best = Some((v, x));
            }
        }
        let mut carry = 0;
        loop {
            idx[carry] += 1;
            if idx[carry] <= coarse {
                break;
            }
            idx[carry] = 0;
            carry += 1;
            if carry == dim {
                break;
            }
        }
        if carry == dim {
            break;
        }
    }
    let (_, mut center) = best.ok_or_else(|| {
        DiagnosticsError::Unsupported("no feasible grid point; set may be lower-dimensional".into())
    })?;

    // Zoom passes: shrink a local window around the incumbent until the
    // grid resolution reaches 1e-3 of the box range.
    let mut step = max_range / coarse as f64;
    let target = 1e-3 * max_range;
    while step > target {
        let next_step = step / 4.0;
        let mut local_best = (oracle.exact_value(&center)?, center.clone());
        let span = 8i64;
        let mut offs = vec![-span; dim];
        loop {
            let x: Vec<f64> = (0..dim)
                .map(|i| {
                    (center[i] + offs[i] as f64 * next_step).clamp(lo[i], hi[i])
                })
                .collect();
            if set.contains(&x, 1e-9) {
                let v = oracle.exact_value(&x)?;
                if v > local_best.0 {
                    local_best = (v, x);
                }
            }
            let mut carry = 0;
            loop {
                offs[carry] += 1;
                if offs[carry] <= span {
                    break;
                }
                offs[carry] = -span;
                carry += 1;
                if carry == dim {
                    break;
                }
            }
            if carry == dim {
                break;
            }
        }
        center = local_best.1;
        step = next_step;
    }

    // Local polish: single and pairwise coordinate moves with halving
    // steps. The pairwise moves matter when a budget constraint is tight:
    // they trade mass between coordinates without leaving the set. For a
    // concave objective this terminates at the constrained maximum.
    let mut h = target;
    let mut value = oracle.exact_value(&center)?;
    while h > 1e-12 * max_range {
        let mut improved = true;
        while improved {
            improved = false;
            let mut moves: Vec<Vec<f64>> = Vec::new();
            for i in 0..dim {
                for sgn in [1.0, -1.0] {
                    let mut m = vec![0.0; dim];
                    m[i] = sgn * h;
                    moves.push(m);
                }
                for j in 0..dim {
                    if i != j {
                        let mut m = vec![0.0; dim];
                        m[i] = h;
                        m[j] = -h;
                        moves.push(m);
                    }
                }
            }
            for m in moves {
                let x = linalg::add(&center, &m);
                if set.contains(&x, 0.0) {
                    let v = oracle.exact_value(&x)?;
                    if v > value + 1e-15 {
                        value = v;
                        center = x;
                        improved = true;
                    }
                }
            }
        }
        h /= 2.0;
    }
    Ok(OptResult { value, point: center, certified_gap: None })
}

/// Deterministic Frank-Wolfe reference loop on the exact gradient. Returns
/// the whole trajectory `x_1 .. x_{T+1}`; the iterate update uses the same
/// arithmetic expressions as the stochastic solvers so zero-noise runs can
/// be compared bit for bit.
pub fn deterministic_fw(
    exact_grad_at: impl Fn(&[f64]) -> Vec<f64>,
    set: &ConstraintSet,
    mode: Mode,
    horizon: u64,
    eta_at: impl Fn(u64) -> f64,
    start: &[f64],
) -> Result<Vec<Vec<f64>>, SetError> {
    let sense = if mode == Mode::SubmodularMax { Sense::Maximize } else { Sense::Minimize };
    let mut traj = Vec::with_capacity(horizon as usize + 1);
    let mut x = start.to_vec();
    traj.push(x.clone());
    for t in 1..=horizon {
        let g = exact_grad_at(&x);
        let v = set.lmo(&g, sense)?;
        let eta = eta_at(t);
        let x_next: Vec<f64> = match mode {
            Mode::SubmodularMax => x.iter().zip(&v).map(|(xi, vi)| xi + eta * vi).collect(),
            _ => x.iter().zip(&v).map(|(xi, vi)| xi + eta * (vi - xi)).collect(),
        };
        x = x_next;
        traj.push(x.clone());
    }
    Ok(traj)
}

/// Spectral norm estimate of a symmetric operator given by its
/// matrix-vector product, via power iteration.
pub fn spectral_norm(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    dim: usize,
    iterations: usize,
    rng: &mut Rng,
) -> f64 {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
    let n = linalg::norm(&v);
    if n == 0.0 {
        return 0.0;
    }
    for vi in &mut v {
        *vi /= n;
    }
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let w = apply(&v);
        lambda = linalg::norm(&w);
        if lambda < 1e-300 {
            return 0.0;
        }
        v = linalg::scaled(&w, 1.0 / lambda);
    }
    lambda
}

/// Sample mean and standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
