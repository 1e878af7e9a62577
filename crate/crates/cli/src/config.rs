//! Experiment configuration: a plain sectioned key-value text format.
//!
//! Grammar (documented in the README):
//!
//! ```text
//! # comment                      blank lines and '#' comments are skipped
//! [section]                      sections: problem, constraint, solver,
//! key = value                    sweep, output
//! ```
//!
//! Values are scalars, names, or comma-separated lists. Every diagnostic
//! carries the line number and the field it refers to, so a broken config
//! pinpoints itself.

use sfw_core::estimator::{DeltaOption, StepRule};
use sfw_core::oracles::{
    ConcaveNqp, FiniteSumLogistic, NonconvexSigmoidSum, ObliviousQuadratic, SetFunction,
    SmoothedMultilinear, StochasticOracle,
};
use sfw_core::sets::{ConstraintSet, Sense};
use sfw_core::solver::{Algorithm, EtaSchedule, Mode, RhoSchedule};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {}: {}: {}", line, self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, field: field.into(), message: message.into() }
}

/// One parsed `key = value` with its source line.
#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: String,
    used: std::cell::Cell<bool>,
}

/// Raw sectioned key-value file.
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

const KNOWN_SECTIONS: &[&str] = &["problem", "constraint", "solver", "sweep", "output"];

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim().to_string();
                if !KNOWN_SECTIONS.contains(&name.as_str()) {
                    return Err(err(
                        Some(line_no),
                        format!("[{name}]"),
                        format!("unknown section (expected one of {KNOWN_SECTIONS:?})"),
                    ));
                }
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(Some(line_no), line, "expected `key = value` or `[section]`"));
            };
            let Some(section) = current.clone() else {
                return Err(err(Some(line_no), key.trim(), "key appears before any [section]"));
            };
            let key = key.trim().to_string();
            let entry = Entry {
                line: line_no,
                value: value.trim().to_string(),
                used: std::cell::Cell::new(false),
            };
            if sections.get_mut(&section).unwrap().insert(key.clone(), entry).is_some() {
                return Err(err(
                    Some(line_no),
                    format!("[{section}] {key}"),
                    "duplicate key",
                ));
            }
        }
        Ok(Self { sections })
    }

    fn section(&self, name: &str) -> Option<&BTreeMap<String, Entry>> {
        self.sections.get(name)
    }

    fn require_section(&self, name: &str) -> Result<&BTreeMap<String, Entry>, ConfigError> {
        self.section(name)
            .ok_or_else(|| err(None, format!("[{name}]"), "required section is missing"))
    }

    /// After extraction, any key never read is a typo worth rejecting.
    fn check_unused(&self) -> Result<(), ConfigError> {
        for (section, entries) in &self.sections {
            for (key, entry) in entries {
                if !entry.used.get() {
                    return Err(err(
                        Some(entry.line),
                        format!("[{section}] {key}"),
                        "unknown key for this section/problem",
                    ));
                }
            }
        }
        Ok(())
    }
}

struct SectionReader<'a> {
    name: &'a str,
    entries: &'a BTreeMap<String, Entry>,
}

impl<'a> SectionReader<'a> {
    fn get(&self, key: &str) -> Option<(usize, &'a str)> {
        self.entries.get(key).map(|e| {
            e.used.set(true);
            (e.line, e.value.as_str())
        })
    }

    fn field(&self, key: &str) -> String {
        format!("[{}] {key}", self.name)
    }

    fn require(&self, key: &str) -> Result<(usize, &'a str), ConfigError> {
        self.get(key).ok_or_else(|| err(None, self.field(key), "required key is missing"))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| err(Some(line), self.field(key), format!("expected a number, got `{v}`"))),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<u64>().map(Some).map_err(|_| {
                err(Some(line), self.field(key), format!("expected a nonnegative integer, got `{v}`"))
            }),
        }
    }

    fn usize_req(&self, key: &str) -> Result<usize, ConfigError> {
        let (line, v) = self.require(key)?;
        v.parse::<usize>().map_err(|_| {
            err(Some(line), self.field(key), format!("expected a nonnegative integer, got `{v}`"))
        })
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((line, "true")) => {
                let _ = line;
                Ok(true)
            }
            Some((line, "false")) => {
                let _ = line;
                Ok(false)
            }
            Some((line, v)) => {
                Err(err(Some(line), self.field(key), format!("expected true/false, got `{v}`")))
            }
        }
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    let part = part.trim();
                    out.push(part.parse::<f64>().map_err(|_| {
                        err(
                            Some(line),
                            self.field(key),
                            format!("expected a comma-separated list of numbers, got `{part}`"),
                        )
                    })?);
                }
                Ok(Some(out))
            }
        }
    }
}

/// How the starting point is chosen.
#[derive(Clone, Debug)]
pub enum StartRule {
    /// LMO vertex of the all-ones direction: a deterministic feasible vertex.
    MinVertex,
    Origin,
    Explicit(Vec<f64>),
}

impl StartRule {
    pub fn point(&self, set: &ConstraintSet) -> Result<Vec<f64>, ConfigError> {
        match self {
            StartRule::MinVertex => set
                .lmo(&vec![1.0; set.dim()], Sense::Minimize)
                .map_err(|e| err(None, "[solver] start", e.to_string())),
            StartRule::Origin => Ok(vec![0.0; set.dim()]),
            StartRule::Explicit(x) => Ok(x.clone()),
        }
    }
}

/// Problem-zoo instance description; building it yields the oracle.
#[derive(Clone, Debug)]
pub enum ProblemConfig {
    Quadratic { dim: usize, eig_lo: f64, eig_hi: f64, noise: f64, data_seed: u64 },
    Logistic { dim: usize, terms: usize, feature_scale: f64, data_seed: u64 },
    SigmoidSum { dim: usize, terms: usize, feature_scale: f64, data_seed: u64 },
    Nqp { dim: usize, noise: f64, data_seed: u64 },
    Multilinear { dim: usize, xi: f64, coverage: bool, data_seed: u64 },
}

impl ProblemConfig {
    pub fn dim(&self) -> usize {
        match self {
            ProblemConfig::Quadratic { dim, .. }
            | ProblemConfig::Logistic { dim, .. }
            | ProblemConfig::SigmoidSum { dim, .. }
            | ProblemConfig::Nqp { dim, .. }
            | ProblemConfig::Multilinear { dim, .. } => *dim,
        }
    }

    /// Instantiates the oracle. `domain_radius` certifies the constants over
    /// the feasible set the run uses.
    pub fn build(&self, domain_radius: f64) -> Result<Box<dyn StochasticOracle>, ConfigError> {
        let fail = |e: sfw_core::oracles::OracleError| err(None, "[problem]", e.to_string());
        Ok(match self {
            ProblemConfig::Quadratic { dim, eig_lo, eig_hi, noise, data_seed } => Box::new(
                ObliviousQuadratic::generate(*dim, *eig_lo, *eig_hi, *noise, domain_radius, *data_seed)
                    .map_err(fail)?,
            ),
            ProblemConfig::Logistic { dim, terms, feature_scale, data_seed } => Box::new(
                FiniteSumLogistic::generate(*terms, *dim, *feature_scale, domain_radius, *data_seed)
                    .map_err(fail)?,
            ),
            ProblemConfig::SigmoidSum { dim, terms, feature_scale, data_seed } => Box::new(
                NonconvexSigmoidSum::generate(*terms, *dim, *feature_scale, *data_seed)
                    .map_err(fail)?,
            ),
            ProblemConfig::Nqp { dim, noise, data_seed } => {
                Box::new(ConcaveNqp::generate(*dim, *noise, *data_seed).map_err(fail)?)
            }
            ProblemConfig::Multilinear { dim, xi, coverage, data_seed } => {
                let f = if *coverage {
                    SetFunction::generate_coverage(*dim, *data_seed)
                } else {
                    SetFunction::generate_budget_additive(*dim, *data_seed)
                }
                .map_err(fail)?;
                Box::new(SmoothedMultilinear::new(f, *xi).map_err(fail)?)
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolverSection {
    pub algorithms: Vec<Algorithm>,
    pub mode: Mode,
    pub horizon: u64,
    pub delta_option: DeltaOption,
    pub alpha: Option<f64>,
    pub eta: Option<EtaSchedule>,
    pub rho: Option<RhoSchedule>,
    pub start: StartRule,
    pub record_exact: bool,
}

#[derive(Clone, Debug)]
pub struct SweepSection {
    /// Seed indices to run; either a count (`seeds = 20` expands to
    /// `0..20`) or an explicit list (`seed_list = 3, 7, 9`).
    pub seed_indices: Vec<u64>,
    pub base_seed: u64,
}

#[derive(Clone, Debug)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub csv: bool,
    pub json: bool,
}

/// Fully validated experiment description.
#[derive(Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub constraint: ConstraintSet,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

pub fn parse_experiment(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw = RawConfig::parse(text)?;

    // [problem]
    let problem = {
        let entries = raw.require_section("problem")?;
        let s = SectionReader { name: "problem", entries };
        let (line, name) = s.require("name")?;
        let dim = s.usize_req("dim")?;
        let data_seed = s.u64("data_seed")?.unwrap_or(0);
        match name {
            "oblivious_quadratic" => ProblemConfig::Quadratic {
                dim,
                eig_lo: s.f64_or("eig_lo", 0.5)?,
                eig_hi: s.f64_or("eig_hi", 2.0)?,
                noise: s.f64_or("noise", 1.0)?,
                data_seed,
            },
            "finite_sum_logistic" => ProblemConfig::Logistic {
                dim,
                terms: s.u64("terms")?.unwrap_or(50) as usize,
                feature_scale: s.f64_or("feature_scale", 2.0)?,
                data_seed,
            },
            "nonconvex_sigmoid_sum" => ProblemConfig::SigmoidSum {
                dim,
                terms: s.u64("terms")?.unwrap_or(50) as usize,
                feature_scale: s.f64_or("feature_scale", 3.0)?,
                data_seed,
            },
            "concave_nqp" => {
                ProblemConfig::Nqp { dim, noise: s.f64_or("noise", 0.1)?, data_seed }
            }
            "smoothed_multilinear" => {
                let coverage = match s.get("set_function") {
                    None => true,
                    Some((_, "coverage")) => true,
                    Some((_, "budget_additive")) => false,
                    Some((l, v)) => {
                        return Err(err(
                            Some(l),
                            "[problem] set_function",
                            format!("expected coverage or budget_additive, got `{v}`"),
                        ));
                    }
                };
                ProblemConfig::Multilinear { dim, xi: s.f64_or("xi", 0.25)?, coverage, data_seed }
            }
            other => {
                return Err(err(
                    Some(line),
                    "[problem] name",
                    format!("unknown problem `{other}`"),
                ));
            }
        }
    };

    // [constraint]
    let constraint = {
        let entries = raw.require_section("constraint")?;
        let s = SectionReader { name: "constraint", entries };
        let (line, kind) = s.require("kind")?;
        let dim = problem.dim();
        let build = |r: Result<ConstraintSet, sfw_core::sets::SetError>| {
            r.map_err(|e| err(Some(line), "[constraint]", e.to_string()))
        };
        match kind {
            "unit_simplex" => build(ConstraintSet::unit_simplex(dim, s.f64_or("scale", 1.0)?))?,
            "l1_ball" => build(ConstraintSet::l1_ball(dim, s.f64_or("radius", 1.0)?))?,
            "l2_ball" => build(ConstraintSet::l2_ball(dim, s.f64_or("radius", 1.0)?))?,
            "box" => {
                let lower = s
                    .f64_list("lower")?
                    .ok_or_else(|| err(None, "[constraint] lower", "required for box"))?;
                let upper = s
                    .f64_list("upper")?
                    .ok_or_else(|| err(None, "[constraint] upper", "required for box"))?;
                build(ConstraintSet::hyper_box(lower, upper))?
            }
            "budgeted_box" => {
                let upper = s.f64_list("upper")?.unwrap_or_else(|| vec![1.0; dim]);
                let budget = s.f64_or("budget", upper.iter().sum::<f64>() / 2.0)?;
                build(ConstraintSet::budgeted_box(upper, budget))?
            }
            other => {
                return Err(err(
                    Some(line),
                    "[constraint] kind",
                    format!("unknown constraint kind `{other}`"),
                ));
            }
        }
    };
    if constraint.dim() != problem.dim() {
        return Err(err(
            None,
            "[constraint]",
            format!("dimension {} does not match problem dimension {}", constraint.dim(), problem.dim()),
        ));
    }

    // [solver]
    let solver = {
        let entries = raw.require_section("solver")?;
        let s = SectionReader { name: "solver", entries };
        let (line, algs) = s.require("algorithm")?;
        let mut algorithms = Vec::new();
        for part in algs.split(',') {
            let part = part.trim();
            algorithms.push(Algorithm::parse(part).ok_or_else(|| {
                err(Some(line), "[solver] algorithm", format!("unknown solver `{part}`"))
            })?);
        }
        let (mline, mode) = s.require("mode")?;
        let mode = match mode {
            "convex_min" => Mode::ConvexMin,
            "nonconvex_min" => Mode::NonconvexMin,
            "submodular_max" => Mode::SubmodularMax,
            other => {
                return Err(err(
                    Some(mline),
                    "[solver] mode",
                    format!("unknown mode `{other}`"),
                ));
            }
        };
        let horizon = s
            .u64("horizon")?
            .ok_or_else(|| err(None, "[solver] horizon", "required key is missing"))?;
        let delta_option = match s.get("delta_option") {
            None | Some((_, "exact_hessian")) => DeltaOption::ExactHessian,
            Some((_, "gradient_difference")) => {
                let rule = match s.f64("delta_step")? {
                    Some(v) => StepRule::Fixed(v),
                    None => StepRule::Analytic,
                };
                DeltaOption::GradientDifference(rule)
            }
            Some((_, "oblivious_difference")) => DeltaOption::ObliviousDifference,
            Some((l, other)) => {
                return Err(err(
                    Some(l),
                    "[solver] delta_option",
                    format!("unknown option `{other}`"),
                ));
            }
        };
        // delta_step without gradient_difference would be silently dead.
        if !matches!(delta_option, DeltaOption::GradientDifference(_)) {
            if let Some((l, _)) = s.get("delta_step") {
                return Err(err(
                    Some(l),
                    "[solver] delta_step",
                    "only meaningful with delta_option = gradient_difference",
                ));
            }
        }
        let eta = match s.get("eta") {
            None => None,
            Some((l, v)) => Some(parse_schedule(v).ok_or_else(|| {
                err(
                    Some(l),
                    "[solver] eta",
                    format!("expected power_t:<p>, horizon:<p> or fixed:<v>, got `{v}`"),
                )
            })?),
        };
        let rho = match s.get("rho") {
            None => None,
            Some((l, v)) => Some(parse_rho(v).ok_or_else(|| {
                err(
                    Some(l),
                    "[solver] rho",
                    format!("expected power_prev:<a>, power_t:<a> or fixed:<v>, got `{v}`"),
                )
            })?),
        };
        let start = match s.get("start") {
            None => {
                if mode == Mode::SubmodularMax {
                    StartRule::Origin
                } else {
                    StartRule::MinVertex
                }
            }
            Some((_, "min_vertex")) => StartRule::MinVertex,
            Some((_, "origin")) => StartRule::Origin,
            Some((l, list)) => {
                let mut coords = Vec::new();
                for part in list.split(',') {
                    coords.push(part.trim().parse::<f64>().map_err(|_| {
                        err(
                            Some(l),
                            "[solver] start",
                            format!("expected min_vertex, origin, or coordinates, got `{list}`"),
                        )
                    })?);
                }
                StartRule::Explicit(coords)
            }
        };
        SolverSection {
            algorithms,
            mode,
            horizon,
            delta_option,
            alpha: s.f64("alpha")?,
            eta,
            rho,
            start,
            record_exact: s.bool_or("record_exact", true)?,
        }
    };

    // [sweep] (optional)
    let sweep = match raw.section("sweep") {
        None => SweepSection { seed_indices: vec![0], base_seed: 0 },
        Some(entries) => {
            let s = SectionReader { name: "sweep", entries };
            let count = s.u64("seeds")?;
            let list = match s.get("seed_list") {
                None => None,
                Some((l, v)) => {
                    let mut out = Vec::new();
                    for part in v.split(',') {
                        let part = part.trim();
                        out.push(part.parse::<u64>().map_err(|_| {
                            err(
                                Some(l),
                                "[sweep] seed_list",
                                format!("expected comma-separated seed indices, got `{part}`"),
                            )
                        })?);
                    }
                    Some((l, out))
                }
            };
            let seed_indices = match (count, list) {
                (Some(_), Some((l, _))) => {
                    return Err(err(
                        Some(l),
                        "[sweep] seed_list",
                        "give either `seeds` or `seed_list`, not both",
                    ));
                }
                (None, Some((_, list))) => list,
                (count, None) => (0..count.unwrap_or(1).max(1)).collect(),
            };
            SweepSection { seed_indices, base_seed: s.u64("base_seed")?.unwrap_or(0) }
        }
    };

    // [output] (optional)
    let output = match raw.section("output") {
        None => OutputSection { dir: PathBuf::from("runs"), csv: true, json: false },
        Some(entries) => {
            let s = SectionReader { name: "output", entries };
            let dir = PathBuf::from(s.get("dir").map(|(_, v)| v.to_string()).unwrap_or_else(|| "runs".into()));
            let (mut csv, mut json) = (true, false);
            if let Some((l, v)) = s.get("formats") {
                csv = false;
                for part in v.split(',') {
                    match part.trim() {
                        "csv" => csv = true,
                        "json" => json = true,
                        other => {
                            return Err(err(
                                Some(l),
                                "[output] formats",
                                format!("expected csv and/or json, got `{other}`"),
                            ));
                        }
                    }
                }
            }
            OutputSection { dir, csv, json }
        }
    };

    raw.check_unused()?;
    Ok(ExperimentConfig { problem, constraint, solver, sweep, output })
}

fn parse_schedule(v: &str) -> Option<EtaSchedule> {
    let (kind, arg) = v.split_once(':')?;
    let p = arg.trim().parse::<f64>().ok()?;
    match kind.trim() {
        "power_t" => Some(EtaSchedule::PowerOfT(p)),
        "horizon" => Some(EtaSchedule::HorizonPower(p)),
        "fixed" => Some(EtaSchedule::Fixed(p)),
        _ => None,
    }
}

fn parse_rho(v: &str) -> Option<RhoSchedule> {
    let (kind, arg) = v.split_once(':')?;
    let p = arg.trim().parse::<f64>().ok()?;
    match kind.trim() {
        "power_prev" => Some(RhoSchedule::PowerOfPrev(p)),
        "power_t" => Some(RhoSchedule::PowerOfT(p)),
        "fixed" => Some(RhoSchedule::Fixed(p)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[problem]
name = oblivious_quadratic
dim = 5
data_seed = 7

[constraint]
kind = unit_simplex
scale = 1.0

[solver]
algorithm = one_sfw
mode = convex_min
horizon = 100
";

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_experiment(MINIMAL).unwrap();
        assert_eq!(cfg.problem.dim(), 5);
        assert_eq!(cfg.solver.horizon, 100);
        assert_eq!(cfg.sweep.seed_indices, vec![0]);
        assert!(cfg.output.csv && !cfg.output.json);
    }

    #[test]
    fn seed_list_alternative() {
        let text = format!("{MINIMAL}\n[sweep]\nseed_list = 3, 7, 9\n");
        let cfg = parse_experiment(&text).unwrap();
        assert_eq!(cfg.sweep.seed_indices, vec![3, 7, 9]);
        let both = format!("{MINIMAL}\n[sweep]\nseeds = 2\nseed_list = 1\n");
        let e = parse_experiment(&both).unwrap_err();
        assert!(e.message.contains("not both"), "{e}");
    }

    #[test]
    fn unknown_solver_is_field_precise() {
        let text = MINIMAL.replace("one_sfw", "magic_solver");
        let e = parse_experiment(&text).unwrap_err();
        assert!(e.field.contains("algorithm"), "{e}");
        assert!(e.message.contains("magic_solver"), "{e}");
        assert!(e.line.is_some());
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = format!("{MINIMAL}\nturbo = yes\n");
        let e = parse_experiment(&text).unwrap_err();
        assert!(e.field.contains("turbo"), "{e}");
        assert!(e.line.is_some());
    }

    #[test]
    fn missing_section_reported() {
        let text = "
[problem]
name = concave_nqp
dim = 3
";
        let e = parse_experiment(text).unwrap_err();
        assert!(e.field.contains("constraint"), "{e}");
    }

    #[test]
    fn bad_number_reports_line() {
        let text = MINIMAL.replace("horizon = 100", "horizon = lots");
        let e = parse_experiment(&text).unwrap_err();
        assert!(e.field.contains("horizon"), "{e}");
        assert!(e.message.contains("lots"), "{e}");
    }

    #[test]
    fn multi_algorithm_list() {
        let text = MINIMAL.replace("algorithm = one_sfw", "algorithm = one_sfw, momentum_fw");
        let cfg = parse_experiment(&text).unwrap();
        assert_eq!(cfg.solver.algorithms.len(), 2);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let text = "
[problem]
name = oblivious_quadratic
dim = 5

[constraint]
kind = box
lower = 0, 0
upper = 1, 1

[solver]
algorithm = one_sfw
mode = convex_min
horizon = 10
";
        let e = parse_experiment(text).unwrap_err();
        assert!(e.message.contains("dimension"), "{e}");
    }

    #[test]
    fn schedules_parse() {
        let text = MINIMAL.replace(
            "horizon = 100",
            "horizon = 100\neta = horizon:0.6667\nrho = power_prev:0.6667\nalpha = 0.6667",
        );
        let cfg = parse_experiment(&text).unwrap();
        assert!(matches!(cfg.solver.eta, Some(EtaSchedule::HorizonPower(_))));
        assert!(matches!(cfg.solver.rho, Some(RhoSchedule::PowerOfPrev(_))));
    }

    #[test]
    fn delta_step_requires_gradient_difference() {
        let text = MINIMAL.replace("horizon = 100", "horizon = 100\ndelta_step = 1e-3");
        let e = parse_experiment(&text).unwrap_err();
        assert!(e.field.contains("delta_step"), "{e}");
    }
}
