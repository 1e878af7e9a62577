//! Experiment execution: expands the config into (solver x seed) cells,
//! runs them across a worker pool, and writes traces and the summary
//! through a single collector so output is deterministic.

use crate::config::ExperimentConfig;
use crate::output::{self, SummaryRow};
use sfw_core::diagnostics::{brute_force_opt, fw_gap_from_grad, mean_and_se};
use sfw_core::rng::stream_seed;
use sfw_core::solver::{run, Algorithm, Mode, RunResult, SolverConfig};
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

#[derive(Debug)]
pub enum RunnerError {
    Io(PathBuf, std::io::Error),
    Cell(String),
}

impl fmt::Display for RunnerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunnerError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            RunnerError::Cell(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for RunnerError {}

struct CellSpec {
    index: usize,
    algorithm: Algorithm,
    seed_index: u64,
}

struct CellOutcome {
    index: usize,
    run_id: String,
    algorithm: Algorithm,
    seed_index: u64,
    result: RunResult,
    final_f: Option<f64>,
    final_subopt: Option<f64>,
    final_fw_gap: Option<f64>,
}

/// Executes every (solver x seed) cell and writes one trace file per cell
/// plus a cross-seed summary. Returns the number of cells executed.
pub fn cmd_run(
    config: &ExperimentConfig,
    workers: usize,
    out_override: Option<PathBuf>,
) -> Result<usize, RunnerError> {
    let out_dir = out_override.unwrap_or_else(|| config.output.dir.clone());
    std::fs::create_dir_all(&out_dir).map_err(|e| RunnerError::Io(out_dir.clone(), e))?;

    let set = &config.constraint;
    // Reference optimum, when a brute-force method covers this problem
    // class; the suboptimality column stays empty otherwise.
    let reference = {
        let oracle = config
            .problem
            .build(set.radius())
            .map_err(|e| RunnerError::Cell(e.to_string()))?;
        match config.solver.mode {
            Mode::ConvexMin | Mode::SubmodularMax => {
                brute_force_opt(oracle.as_ref(), set, config.solver.mode).ok().map(|o| o.value)
            }
            Mode::NonconvexMin => None,
        }
    };

    let cells: Vec<CellSpec> = config
        .solver
        .algorithms
        .iter()
        .flat_map(|alg| config.sweep.seed_indices.iter().map(move |s| (*alg, *s)))
        .enumerate()
        .map(|(index, (algorithm, seed_index))| CellSpec { index, algorithm, seed_index })
        .collect();
    let total = cells.len();
    let workers = workers.max(1).min(total.max(1));

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<Result<CellOutcome, RunnerError>>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let cells = &cells;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let outcome = execute_cell(config, set, reference, &cells[i]);
                if tx.send(outcome).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut outcomes: Vec<CellOutcome> = Vec::with_capacity(total);
        for received in rx {
            outcomes.push(received?);
        }
        outcomes.sort_by_key(|o| o.index);

        // Single collector writes everything in cell order.
        for o in &outcomes {
            let solver = o.algorithm.label();
            if config.output.csv {
                let path = out_dir.join(format!("trace_{}.csv", o.run_id));
                std::fs::write(&path, output::trace_csv(&o.run_id, solver, o.seed_index, &o.result.trace))
                    .map_err(|e| RunnerError::Io(path.clone(), e))?;
            }
            if config.output.json {
                let path = out_dir.join(format!("trace_{}.json", o.run_id));
                std::fs::write(&path, output::trace_json(&o.run_id, solver, o.seed_index, &o.result.trace))
                    .map_err(|e| RunnerError::Io(path.clone(), e))?;
            }
        }

        let mut summary: Vec<SummaryRow> = Vec::new();
        for alg in &config.solver.algorithms {
            let cells: Vec<&CellOutcome> =
                outcomes.iter().filter(|o| o.algorithm == *alg).collect();
            let collect = |f: &dyn Fn(&CellOutcome) -> Option<f64>| {
                let vals: Vec<f64> = cells.iter().filter_map(|o| f(o)).collect();
                if vals.len() == cells.len() && !vals.is_empty() {
                    Some(mean_and_se(&vals))
                } else {
                    None
                }
            };
            summary.push(SummaryRow {
                solver: alg.label().to_string(),
                mode: config.solver.mode.label().to_string(),
                horizon: config.solver.horizon,
                seeds: config.sweep.seed_indices.len() as u64,
                final_f: collect(&|o| o.final_f),
                final_subopt: collect(&|o| o.final_subopt),
                final_fw_gap: collect(&|o| o.final_fw_gap),
                queries_total: cells.iter().map(|o| o.result.oracle_queries).sum(),
            });
        }
        if config.output.csv {
            let path = out_dir.join("summary.csv");
            std::fs::write(&path, output::summary_csv(&summary))
                .map_err(|e| RunnerError::Io(path.clone(), e))?;
        }
        if config.output.json {
            let path = out_dir.join("summary.json");
            std::fs::write(&path, output::summary_json(&summary))
                .map_err(|e| RunnerError::Io(path.clone(), e))?;
        }
        let text = output::summary_text(&summary);
        let path = out_dir.join("summary.txt");
        std::fs::write(&path, &text).map_err(|e| RunnerError::Io(path.clone(), e))?;
        print!("{text}");
        Ok(total)
    })
}

fn execute_cell(
    config: &ExperimentConfig,
    set: &sfw_core::ConstraintSet,
    reference: Option<f64>,
    cell: &CellSpec,
) -> Result<CellOutcome, RunnerError> {
    let run_id = format!("{}-s{:03}", cell.algorithm.label(), cell.seed_index);
    let fail = |msg: String| RunnerError::Cell(format!("cell {run_id}: {msg}"));

    // Each cell constructs its own oracle from the same data seed, so the
    // problem instance is identical across cells and the per-instance query
    // counter is exactly this run's count.
    let oracle = config.problem.build(set.radius()).map_err(|e| fail(e.to_string()))?;
    let start = config.solver.start.point(set).map_err(|e| fail(e.to_string()))?;

    let mut solver_cfg = SolverConfig::new(
        config.solver.mode,
        config.solver.horizon,
        start,
        stream_seed(config.sweep.base_seed, cell.algorithm.label(), cell.seed_index),
    );
    solver_cfg.delta_option = config.solver.delta_option.clone();
    solver_cfg.alpha = config.solver.alpha;
    solver_cfg.eta = config.solver.eta.clone();
    solver_cfg.rho = config.solver.rho.clone();
    solver_cfg.record_exact = config.solver.record_exact;
    solver_cfg.reference_value = reference;

    let result =
        run(cell.algorithm, oracle.as_ref(), set, &solver_cfg).map_err(|e| fail(e.to_string()))?;

    let (mut final_f, mut final_subopt, mut final_fw_gap) = (None, None, None);
    if oracle.caps().has_exact_expectation {
        if let Ok(f) = oracle.exact_value(&result.x_final) {
            final_f = Some(f);
            final_subopt = reference.map(|r| match config.solver.mode {
                Mode::SubmodularMax => r - f,
                _ => f - r,
            });
        }
        if config.solver.mode != Mode::SubmodularMax {
            if let Ok(g) = oracle.exact_grad(&result.x_final) {
                final_fw_gap = fw_gap_from_grad(&g, set, &result.x_final).ok();
            }
        }
    }
    Ok(CellOutcome {
        index: cell.index,
        run_id,
        algorithm: cell.algorithm,
        seed_index: cell.seed_index,
        result,
        final_f,
        final_subopt,
        final_fw_gap,
    })
}

