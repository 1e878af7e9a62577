//! Projection-free solver loops and their schedules.
//!
//! Three loops share one chassis:
//!
//! * the one-sample corrected solver for the general non-oblivious problem
//!   (mixing point, one outcome per iteration feeding both the variation
//!   estimate and the momentum term);
//! * its oblivious specialization (no mixing point, same-outcome gradient
//!   differences);
//! * the plain momentum baseline with its more conservative averaging.
//!
//! Each iteration makes exactly one oracle query. Minimization steps move
//! toward the minimizing vertex, `x <- x + eta (v - x)`; monotone
//! DR-submodular maximization uses the continuous-greedy step `x <- x + eta
//! v` from the origin, whose final point is an average of `T` feasible
//! vertices and hence feasible.

use crate::diagnostics;
use crate::estimator::{self, DeltaOption, EstimatorState, MixPoint};
use crate::linalg;
use crate::oracles::{OracleError, StochasticOracle};
use crate::rng::Rng;
use crate::sets::{ConstraintSet, Sense, SetError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("averaging schedule undefined at t = {t}; the first iteration has no averaging step")]
    ScheduleUndefined { t: u64 },
    #[error("schedule exponent must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("initial point is infeasible")]
    InfeasibleStart,
    #[error("DR-submodular maximization must start at the origin")]
    StartNotOrigin,
    #[error("DR-submodular maximization requires an origin-feasible set")]
    OriginInfeasible,
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("oracle lacks a required capability: {0}")]
    Capability(&'static str),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Estimator(#[from] estimator::EstimatorError),
}

/// What kind of problem the run is solving; fixes the default schedules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    ConvexMin,
    NonconvexMin,
    SubmodularMax,
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::ConvexMin => "convex_min",
            Mode::NonconvexMin => "nonconvex_min",
            Mode::SubmodularMax => "submodular_max",
        }
    }

    fn default_alpha(&self) -> f64 {
        match self {
            Mode::ConvexMin => 1.0,
            Mode::NonconvexMin => 2.0 / 3.0,
            Mode::SubmodularMax => 1.0,
        }
    }

    fn default_eta(&self) -> EtaSchedule {
        match self {
            Mode::ConvexMin => EtaSchedule::PowerOfT(1.0),
            Mode::NonconvexMin => EtaSchedule::HorizonPower(2.0 / 3.0),
            Mode::SubmodularMax => EtaSchedule::HorizonPower(1.0),
        }
    }
}

/// Step-size schedule `eta_t`.
#[derive(Clone, Debug, PartialEq)]
pub enum EtaSchedule {
    /// `t^{-p}`.
    PowerOfT(f64),
    /// `T^{-p}`, constant in `t`.
    HorizonPower(f64),
    Fixed(f64),
}

impl EtaSchedule {
    pub fn value(&self, t: u64, horizon: u64) -> f64 {
        match self {
            EtaSchedule::PowerOfT(p) => (t as f64).powf(-p),
            EtaSchedule::HorizonPower(p) => (horizon as f64).powf(-p),
            EtaSchedule::Fixed(v) => *v,
        }
    }
}

/// Averaging schedule `rho_t`, defined for `t >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub enum RhoSchedule {
    /// `(t-1)^{-alpha}`, the corrected estimators' schedule.
    PowerOfPrev(f64),
    /// `t^{-alpha}`, the conservative baseline schedule.
    PowerOfT(f64),
    Fixed(f64),
}

impl RhoSchedule {
    fn value(&self, t: u64) -> Result<f64, SolverError> {
        if t < 2 {
            return Err(SolverError::ScheduleUndefined { t });
        }
        Ok(match self {
            RhoSchedule::PowerOfPrev(a) => ((t - 1) as f64).powf(-a),
            RhoSchedule::PowerOfT(a) => (t as f64).powf(-a),
            RhoSchedule::Fixed(v) => *v,
        })
    }
}

/// `rho_t = (t-1)^{-alpha}` for `t >= 2`; the first iteration is the
/// initialization branch and has no averaging step.
pub fn rho_schedule(t: u64, alpha: f64) -> Result<f64, SolverError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SolverError::BadAlpha(alpha));
    }
    RhoSchedule::PowerOfPrev(alpha).value(t)
}

/// Which solver loop to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    OneSfw,
    ObliviousOneSfw,
    MomentumFw,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::OneSfw => "one_sfw",
            Algorithm::ObliviousOneSfw => "oblivious_one_sfw",
            Algorithm::MomentumFw => "momentum_fw",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "one_sfw" => Some(Algorithm::OneSfw),
            "oblivious_one_sfw" => Some(Algorithm::ObliviousOneSfw),
            "momentum_fw" => Some(Algorithm::MomentumFw),
            _ => None,
        }
    }
}

/// Full configuration of one solver run.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub mode: Mode,
    /// Number of iterations `T`; the run returns `x_{T+1}`.
    pub horizon: u64,
    pub delta_option: DeltaOption,
    /// Feasible starting point `x_1`.
    pub start: Vec<f64>,
    pub seed: u64,
    /// Record exact objective/gradient diagnostics per iteration (requires
    /// the oracle's exact-expectation capability; never consumes queries).
    pub record_exact: bool,
    /// Override for the averaging exponent; `None` takes the mode default.
    pub alpha: Option<f64>,
    /// Override for the step-size schedule; `None` takes the mode default.
    pub eta: Option<EtaSchedule>,
    /// Override for the averaging schedule; `None` derives it from `alpha`.
    pub rho: Option<RhoSchedule>,
    /// Reference optimum for the suboptimality column, when known.
    pub reference_value: Option<f64>,
}

impl SolverConfig {
    pub fn new(mode: Mode, horizon: u64, start: Vec<f64>, seed: u64) -> Self {
        Self {
            mode,
            horizon,
            delta_option: DeltaOption::ExactHessian,
            start,
            seed,
            record_exact: false,
            alpha: None,
            eta: None,
            rho: None,
            reference_value: None,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or_else(|| self.mode.default_alpha())
    }

    pub fn eta_at(&self, t: u64) -> f64 {
        self.eta
            .clone()
            .unwrap_or_else(|| self.mode.default_eta())
            .value(t, self.horizon)
    }

    fn corrected_rho_at(&self, t: u64) -> Result<f64, SolverError> {
        match &self.rho {
            Some(r) => r.value(t),
            None => rho_schedule(t, self.alpha()),
        }
    }

    /// The baseline's conservative default, `rho_t = t^{-2/3}`.
    fn momentum_rho_at(&self, t: u64) -> Result<f64, SolverError> {
        match &self.rho {
            Some(r) => r.value(t),
            None => RhoSchedule::PowerOfT(2.0 / 3.0).value(t),
        }
    }

    fn validate(&self, oracle_dim: usize, set: &ConstraintSet) -> Result<(), SolverError> {
        if self.horizon == 0 {
            return Err(SolverError::EmptyHorizon);
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(SolverError::BadAlpha(alpha));
        }
        if set.dim() != oracle_dim {
            return Err(SolverError::DimensionMismatch { expected: oracle_dim, got: set.dim() });
        }
        if self.start.len() != oracle_dim {
            return Err(SolverError::DimensionMismatch {
                expected: oracle_dim,
                got: self.start.len(),
            });
        }
        if self.mode == Mode::SubmodularMax {
            if !set.contains_origin() {
                return Err(SolverError::OriginInfeasible);
            }
            if self.start.iter().any(|v| *v != 0.0) {
                return Err(SolverError::StartNotOrigin);
            }
        }
        if !set.contains(&self.start, 1e-9) {
            return Err(SolverError::InfeasibleStart);
        }
        Ok(())
    }
}

/// One row of per-iteration diagnostics, recorded at `x_t` with the
/// surrogate `d_t` in force.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub t: u64,
    /// `None` at `t = 1` (initialization branch).
    pub rho: Option<f64>,
    pub eta: f64,
    /// Difference step actually used, gradient-difference runs only.
    pub delta_step: Option<f64>,
    /// Exact objective `F(x_t)`.
    pub objective: Option<f64>,
    /// Gap to the reference optimum (sign chosen so smaller is better).
    pub suboptimality: Option<f64>,
    /// Frank-Wolfe gap at `x_t` (minimization modes).
    pub fw_gap: Option<f64>,
    /// Squared gradient-surrogate error at `x_t`.
    pub grad_error_sq: Option<f64>,
    /// Oracle queries consumed by this run so far.
    pub queries: u64,
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

/// Outcome of one solver run.
#[derive(Clone, Debug)]
pub struct RunResult {
    /// Final point `x_{T+1}`.
    pub x_final: Vec<f64>,
    /// A point drawn uniformly from `{x_1, ..., x_T}` after the loop (the
    /// output rule for non-convex runs). The draw happens on the run's own
    /// stream, after the loop, so it never perturbs the trajectory.
    pub x_output: Vec<f64>,
    /// All iterates `x_1..x_T`, for verification.
    pub iterates: Vec<Vec<f64>>,
    pub trace: Trace,
    /// Oracle queries consumed by this run; exactly one per iteration.
    pub oracle_queries: u64,
}

enum Flavor {
    OneSample,
    Oblivious,
    Momentum,
}

/// The corrected one-sample solver for the general, possibly non-oblivious
/// problem.
pub fn run_one_sfw<O: StochasticOracle + ?Sized>(
    oracle: &O,
    set: &ConstraintSet,
    config: &SolverConfig,
) -> Result<RunResult, SolverError> {
    let caps = oracle.caps();
    match &config.delta_option {
        DeltaOption::ExactHessian if !caps.has_exact_hessian => {
            return Err(SolverError::Capability("exact Hessian-vector products"));
        }
        DeltaOption::ObliviousDifference if !caps.is_oblivious => {
            return Err(SolverError::Capability("decision-independent sampling"));
        }
        _ => {}
    }
    run_loop(Flavor::OneSample, oracle, set, config)
}

/// The oblivious specialization: one outcome per iteration from the fixed
/// distribution, no mixing point, same-outcome gradient differences.
pub fn run_oblivious_one_sfw<O: StochasticOracle + ?Sized>(
    oracle: &O,
    set: &ConstraintSet,
    config: &SolverConfig,
) -> Result<RunResult, SolverError> {
    if !oracle.caps().is_oblivious {
        return Err(SolverError::Capability("decision-independent sampling"));
    }
    run_loop(Flavor::Oblivious, oracle, set, config)
}

/// The plain momentum baseline.
pub fn run_momentum_fw<O: StochasticOracle + ?Sized>(
    oracle: &O,
    set: &ConstraintSet,
    config: &SolverConfig,
) -> Result<RunResult, SolverError> {
    run_loop(Flavor::Momentum, oracle, set, config)
}

/// Dispatch by algorithm name.
pub fn run<O: StochasticOracle + ?Sized>(
    algorithm: Algorithm,
    oracle: &O,
    set: &ConstraintSet,
    config: &SolverConfig,
) -> Result<RunResult, SolverError> {
    match algorithm {
        Algorithm::OneSfw => run_one_sfw(oracle, set, config),
        Algorithm::ObliviousOneSfw => run_oblivious_one_sfw(oracle, set, config),
        Algorithm::MomentumFw => run_momentum_fw(oracle, set, config),
    }
}

fn run_loop<O: StochasticOracle + ?Sized>(
    flavor: Flavor,
    oracle: &O,
    set: &ConstraintSet,
    config: &SolverConfig,
) -> Result<RunResult, SolverError> {
    let dim = oracle.dim();
    config.validate(dim, set)?;
    let horizon = config.horizon;
    let record = config.record_exact && oracle.caps().has_exact_expectation;

    let mut rng = Rng::seed_from_u64(config.seed);
    let queries_start = oracle.queries();
    let mut x = config.start.clone();
    let mut iterates: Vec<Vec<f64>> = Vec::with_capacity(horizon as usize);
    let mut rows: Vec<TraceRow> = Vec::with_capacity(horizon as usize);
    // Placeholder until the first iteration initializes it.
    let mut state = EstimatorState::new(vec![0.0; dim], x.clone());

    for t in 1..=horizon {
        let mut rho_used = None;
        let mut step_used = None;
        if t == 1 {
            let z = oracle.sample(&x, &mut rng)?;
            state = EstimatorState::new(oracle.grad(&x, &z), x.clone());
        } else {
            match flavor {
                Flavor::OneSample => {
                    let rho = config.corrected_rho_at(t)?;
                    let mix = MixPoint::draw(&mut rng, &x, &state.x_prev);
                    let z = oracle.sample(&mix.point, &mut rng)?;
                    let delta = match &config.delta_option {
                        DeltaOption::ExactHessian => {
                            estimator::delta_exact(oracle, &x, &state, &mix, &z)?
                        }
                        DeltaOption::GradientDifference(rule) => {
                            let step = rule.step(
                                config.eta_at(t - 1),
                                oracle.constants(),
                                set.diameter(),
                            );
                            step_used = Some(step);
                            estimator::delta_graddiff(oracle, &x, &state, &mix, &z, step)?
                        }
                        DeltaOption::ObliviousDifference => {
                            estimator::delta_oblivious(oracle, &x, &state.x_prev, &z)?
                        }
                    };
                    // The same outcome feeds both the variation estimate and
                    // the momentum term: one query per iteration, no secret
                    // resampling.
                    let g = oracle.grad(&x, &z);
                    state = estimator::update(state, rho, &delta, &g)?;
                    rho_used = Some(rho);
                }
                Flavor::Oblivious => {
                    let rho = config.corrected_rho_at(t)?;
                    let z = oracle.sample(&x, &mut rng)?;
                    let delta = estimator::delta_oblivious(oracle, &x, &state.x_prev, &z)?;
                    let g = oracle.grad(&x, &z);
                    state = estimator::update(state, rho, &delta, &g)?;
                    rho_used = Some(rho);
                }
                Flavor::Momentum => {
                    let rho = config.momentum_rho_at(t)?;
                    let z = oracle.sample(&x, &mut rng)?;
                    let g = oracle.grad(&x, &z);
                    state = estimator::momentum_update(state, rho, &g)?;
                    rho_used = Some(rho);
                }
            }
        }

        let eta = config.eta_at(t);
        let sense =
            if config.mode == Mode::SubmodularMax { Sense::Maximize } else { Sense::Minimize };
        let vertex = set.lmo(&state.surrogate, sense)?;

        let mut row = TraceRow {
            t,
            rho: rho_used,
            eta,
            delta_step: step_used,
            objective: None,
            suboptimality: None,
            fw_gap: None,
            grad_error_sq: None,
            queries: oracle.queries() - queries_start,
        };
        if record {
            let fx = oracle.exact_value(&x)?;
            row.objective = Some(fx);
            row.suboptimality = config.reference_value.map(|fref| match config.mode {
                Mode::SubmodularMax => fref - fx,
                _ => fx - fref,
            });
            let gx = oracle.exact_grad(&x)?;
            row.grad_error_sq = {
                let e = linalg::sub(&gx, &state.surrogate);
                Some(linalg::dot(&e, &e))
            };
            if config.mode != Mode::SubmodularMax {
                row.fw_gap = Some(diagnostics::fw_gap_from_grad(&gx, set, &x)?);
            }
        }
        rows.push(row);
        iterates.push(x.clone());

        let x_next: Vec<f64> = match config.mode {
            Mode::SubmodularMax => x.iter().zip(&vertex).map(|(xi, vi)| xi + eta * vi).collect(),
            _ => x.iter().zip(&vertex).map(|(xi, vi)| xi + eta * (vi - xi)).collect(),
        };
        state.x_prev = x;
        x = x_next;
    }

    let pick = rng.index(horizon as usize);
    let x_output = iterates[pick].clone();
    Ok(RunResult {
        x_final: x,
        x_output,
        iterates,
        trace: Trace { rows },
        oracle_queries: oracle.queries() - queries_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{ObliviousQuadratic, SetFunction, SmoothedMultilinear};

    fn quad(noise: f64, seed: u64) -> ObliviousQuadratic {
        ObliviousQuadratic::generate(5, 0.5, 2.0, noise, 1.0, seed).unwrap()
    }

    fn simplex() -> ConstraintSet {
        ConstraintSet::unit_simplex(5, 1.0).unwrap()
    }

    fn vertex_start(set: &ConstraintSet) -> Vec<f64> {
        set.lmo(&vec![1.0; set.dim()], Sense::Minimize).unwrap()
    }

    #[test]
    fn rho_schedule_values() {
        assert_eq!(rho_schedule(2, 0.37).unwrap(), 1.0);
        assert!((rho_schedule(5, 2.0 / 3.0).unwrap() - 0.39685).abs() < 1e-5);
        assert!((rho_schedule(101, 1.0).unwrap() - 0.01).abs() < 1e-15);
        assert!(matches!(rho_schedule(1, 1.0), Err(SolverError::ScheduleUndefined { t: 1 })));
        assert!(matches!(rho_schedule(5, 1.5), Err(SolverError::BadAlpha(_))));
    }

    #[test]
    fn horizon_one_returns_first_vertex() {
        // With eta_1 = 1 the first step lands exactly on the LMO vertex.
        let o = quad(0.5, 1);
        let set = simplex();
        let cfg = SolverConfig::new(Mode::ConvexMin, 1, vertex_start(&set), 7);
        let res = run_one_sfw(&o, &set, &cfg).unwrap();
        let mut rng = Rng::seed_from_u64(7);
        let z = o.sample(&cfg.start, &mut rng).unwrap();
        let d1 = o.grad(&cfg.start, &z);
        let v1 = set.lmo(&d1, Sense::Minimize).unwrap();
        assert_eq!(res.x_final, v1);
        assert_eq!(res.oracle_queries, 1);
    }

    #[test]
    fn one_query_per_iteration_all_flavors() {
        let set = simplex();
        for t in [1u64, 13, 200] {
            for (alg, opt) in [
                (Algorithm::OneSfw, DeltaOption::ExactHessian),
                (Algorithm::OneSfw, DeltaOption::GradientDifference(estimator::StepRule::Analytic)),
                (Algorithm::OneSfw, DeltaOption::ObliviousDifference),
                (Algorithm::ObliviousOneSfw, DeltaOption::ObliviousDifference),
                (Algorithm::MomentumFw, DeltaOption::ExactHessian),
            ] {
                let o = quad(0.5, 3);
                let mut cfg = SolverConfig::new(Mode::ConvexMin, t, vertex_start(&set), 5);
                cfg.delta_option = opt;
                let res = run(alg, &o, &set, &cfg).unwrap();
                assert_eq!(res.oracle_queries, t, "{}", alg.label());
                assert_eq!(o.queries(), t);
                assert_eq!(res.trace.rows.len(), t as usize);
            }
        }
    }

    #[test]
    fn iterates_stay_feasible() {
        let o = quad(1.0, 9);
        let set = simplex();
        let mut cfg = SolverConfig::new(Mode::ConvexMin, 500, vertex_start(&set), 11);
        cfg.record_exact = true;
        let res = run_one_sfw(&o, &set, &cfg).unwrap();
        for x in &res.iterates {
            assert!(set.contains(x, 1e-9));
        }
        assert!(set.contains(&res.x_final, 1e-9));
        assert!(set.contains(&res.x_output, 1e-9));
    }

    #[test]
    fn identical_seed_identical_trace() {
        let set = simplex();
        let run_once = || {
            let o = quad(0.8, 21);
            let mut cfg = SolverConfig::new(Mode::ConvexMin, 100, vertex_start(&set), 33);
            cfg.record_exact = true;
            run_one_sfw(&o, &set, &cfg).unwrap()
        };
        let a = run_once();
        let b = run_once();
        assert_eq!(a.x_final, b.x_final);
        assert_eq!(a.x_output, b.x_output);
        for (ra, rb) in a.trace.rows.iter().zip(&b.trace.rows) {
            assert_eq!(ra.objective, rb.objective);
            assert_eq!(ra.grad_error_sq, rb.grad_error_sq);
        }
    }

    #[test]
    fn schedules_reproduced_in_trace() {
        let o = quad(0.5, 2);
        let set = simplex();
        let horizon = 50;
        let mut cfg = SolverConfig::new(Mode::ConvexMin, horizon, vertex_start(&set), 3);
        cfg.delta_option = DeltaOption::GradientDifference(estimator::StepRule::Analytic);
        let res = run_one_sfw(&o, &set, &cfg).unwrap();
        for t in [2u64, 10, horizon] {
            let row = &res.trace.rows[(t - 1) as usize];
            assert_eq!(row.rho.unwrap(), rho_schedule(t, 1.0).unwrap());
            assert_eq!(row.eta, (t as f64).powf(-1.0));
            let want_step = estimator::StepRule::Analytic.step(
                cfg.eta_at(t - 1),
                o.constants(),
                set.diameter(),
            );
            assert_eq!(row.delta_step.unwrap(), want_step);
        }
        assert!(res.trace.rows[0].rho.is_none());
    }

    #[test]
    fn submodular_final_point_is_vertex_average() {
        let f = SetFunction::generate_coverage(4, 3).unwrap();
        let o = SmoothedMultilinear::new(f, 0.25).unwrap();
        let set = ConstraintSet::budgeted_box(vec![1.0; 4], 2.0).unwrap();
        let horizon = 40;
        let cfg = SolverConfig::new(Mode::SubmodularMax, horizon, vec![0.0; 4], 17);
        let res = run_one_sfw(&o, &set, &cfg).unwrap();
        assert!(set.contains(&res.x_final, 1e-9));
        // x_{T+1} = sum(v_t) / T: reconstruct from consecutive iterates.
        let mut acc = vec![0.0; 4];
        for t in 0..res.iterates.len() {
            let next = if t + 1 < res.iterates.len() { &res.iterates[t + 1] } else { &res.x_final };
            for i in 0..4 {
                acc[i] += next[i] - res.iterates[t][i];
            }
        }
        assert!(linalg::max_abs_diff(&acc, &res.x_final) < 1e-12);
    }

    #[test]
    fn submodular_requires_origin_start() {
        let f = SetFunction::generate_coverage(3, 1).unwrap();
        let o = SmoothedMultilinear::new(f, 0.25).unwrap();
        let set = ConstraintSet::budgeted_box(vec![1.0; 3], 1.5).unwrap();
        let mut cfg = SolverConfig::new(Mode::SubmodularMax, 10, vec![0.1, 0.0, 0.0], 1);
        assert!(matches!(run_one_sfw(&o, &set, &cfg), Err(SolverError::StartNotOrigin)));
        cfg.start = vec![0.0; 3];
        assert!(run_one_sfw(&o, &set, &cfg).is_ok());
        // Simplex has no feasible origin.
        let simplex3 = ConstraintSet::unit_simplex(3, 1.0).unwrap();
        let q = ObliviousQuadratic::generate(3, 0.5, 1.0, 0.1, 1.0, 2).unwrap();
        let cfg2 = SolverConfig::new(Mode::SubmodularMax, 10, vec![0.0; 3], 1);
        assert!(matches!(
            run_one_sfw(&q, &simplex3, &cfg2),
            Err(SolverError::OriginInfeasible)
        ));
    }

    #[test]
    fn capability_and_feasibility_errors() {
        let set = simplex();
        let o = quad(0.5, 5);
        let mut cfg = SolverConfig::new(Mode::ConvexMin, 10, vec![0.9; 5], 1);
        assert!(matches!(run_one_sfw(&o, &set, &cfg), Err(SolverError::InfeasibleStart)));
        cfg.start = vertex_start(&set);

        // Non-oblivious oracle cannot run the oblivious loop or the
        // oblivious difference option.
        let f = SetFunction::generate_coverage(5, 2).unwrap();
        let ml = SmoothedMultilinear::new(f, 0.25).unwrap();
        let bb = ConstraintSet::budgeted_box(vec![1.0; 5], 2.0).unwrap();
        let mut mlcfg = SolverConfig::new(Mode::ConvexMin, 10, vec![0.0; 5], 1);
        assert!(matches!(
            run_oblivious_one_sfw(&ml, &bb, &mlcfg),
            Err(SolverError::Capability(_))
        ));
        mlcfg.delta_option = DeltaOption::ObliviousDifference;
        assert!(matches!(run_one_sfw(&ml, &bb, &mlcfg), Err(SolverError::Capability(_))));
    }

    #[test]
    fn momentum_with_full_weight_tracks_latest_gradient() {
        // rho = 1 degenerates to using the newest stochastic gradient only.
        let o = quad(0.0, 8);
        let set = simplex();
        let mut cfg = SolverConfig::new(Mode::ConvexMin, 30, vertex_start(&set), 2);
        cfg.rho = Some(RhoSchedule::Fixed(1.0));
        cfg.record_exact = true;
        let res = run_momentum_fw(&o, &set, &cfg).unwrap();
        // Zero noise + rho = 1 means the surrogate equals the exact
        // gradient, so the recorded error is exactly zero from t = 1 on.
        for row in &res.trace.rows {
            assert_eq!(row.grad_error_sq.unwrap(), 0.0);
        }
    }

    /// Exact expectation of the oblivious surrogate along a frozen path:
    /// enumerate every index sequence of a two-component finite sum over
    /// three iterations and average the recursion by hand.
    #[test]
    fn oblivious_surrogate_exact_expectation_by_path_enumeration() {
        use crate::oracles::{FiniteSumLogistic, Payload, Sample};

        let o = FiniteSumLogistic::generate(2, 3, 1.5, 1.0, 23).unwrap();
        let path = [
            vec![0.3, -0.1, 0.2],
            vec![0.1, 0.2, -0.3],
            vec![-0.2, 0.1, 0.4],
        ];
        let z_at = |i: usize, x: &[f64]| Sample {
            payload: Payload::Index(i),
            birth_point: x.to_vec(),
        };
        let mut mean = vec![0.0; 3];
        for z1 in 0..2usize {
            for z2 in 0..2usize {
                for z3 in 0..2usize {
                    let d1 = o.grad(&path[0], &z_at(z1, &path[0]));
                    // t = 2: full averaging weight, history is dropped.
                    let rho2 = rho_schedule(2, 1.0).unwrap();
                    let s2 = z_at(z2, &path[1]);
                    let delta2 =
                        estimator::delta_oblivious(&o, &path[1], &path[0], &s2).unwrap();
                    let st = EstimatorState::new(d1, path[0].clone());
                    let mut st = estimator::update(st, rho2, &delta2, &o.grad(&path[1], &s2))
                        .unwrap();
                    st.x_prev = path[1].clone();
                    // t = 3.
                    let rho3 = rho_schedule(3, 1.0).unwrap();
                    let s3 = z_at(z3, &path[2]);
                    let delta3 =
                        estimator::delta_oblivious(&o, &path[2], &path[1], &s3).unwrap();
                    let st = estimator::update(st, rho3, &delta3, &o.grad(&path[2], &s3))
                        .unwrap();
                    linalg::axpy(&mut mean, 1.0 / 8.0, &st.surrogate);
                }
            }
        }
        let want = o.exact_grad(&path[2]).unwrap();
        assert!(
            linalg::max_abs_diff(&mean, &want) < 1e-12,
            "enumerated mean {mean:?} vs exact {want:?}"
        );
    }

    #[test]
    fn trace_rows_have_queries_equal_t() {
        let o = quad(0.3, 4);
        let set = simplex();
        let cfg = SolverConfig::new(Mode::ConvexMin, 25, vertex_start(&set), 6);
        let res = run_one_sfw(&o, &set, &cfg).unwrap();
        for (i, row) in res.trace.rows.iter().enumerate() {
            assert_eq!(row.queries, i as u64 + 1);
        }
    }
}
