//! Post-hoc aggregation of trace directories: groups runs by solver,
//! averages the recorded series across seeds, fits decay exponents, and
//! emits a comparison table.

use crate::output::{fmt_f64, TRACE_HEADER};
use sfw_core::diagnostics::{mean_and_se, rate_fit};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum ReportError {
    Io(PathBuf, std::io::Error),
    NoTraces(PathBuf),
    Malformed(PathBuf, String),
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            ReportError::NoTraces(p) => {
                write!(f, "{}: no trace CSV files found", p.display())
            }
            ReportError::Malformed(p, msg) => write!(f, "{}: {msg}", p.display()),
        }
    }
}

impl std::error::Error for ReportError {}

#[derive(Clone, Debug, Default)]
struct ParsedRow {
    t: u64,
    subopt: Option<f64>,
    fw_gap: Option<f64>,
    grad_err_sq: Option<f64>,
    objective: Option<f64>,
    queries: u64,
}

struct ParsedTrace {
    solver: String,
    rows: Vec<ParsedRow>,
}

fn parse_trace(path: &Path) -> Result<Option<ParsedTrace>, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|e| ReportError::Io(path.into(), e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == TRACE_HEADER => {}
        // Not a trace file (summary.csv, report.csv, ...): skip silently.
        _ => return Ok(None),
    }
    let mut solver = String::new();
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(ReportError::Malformed(
                path.into(),
                format!("row {}: expected 12 fields, got {}", idx + 2, fields.len()),
            ));
        }
        solver = fields[1].to_string();
        let opt = |s: &str| -> Option<f64> { if s.is_empty() { None } else { s.parse().ok() } };
        let num = |s: &str, what: &str| -> Result<u64, ReportError> {
            s.parse().map_err(|_| {
                ReportError::Malformed(path.into(), format!("row {}: bad {what} `{s}`", idx + 2))
            })
        };
        rows.push(ParsedRow {
            t: num(fields[3], "t")?,
            subopt: opt(fields[8]),
            fw_gap: opt(fields[9]),
            grad_err_sq: opt(fields[10]),
            objective: opt(fields[7]),
            queries: num(fields[11], "queries")?,
        });
    }
    if rows.is_empty() {
        return Ok(None);
    }
    Ok(Some(ParsedTrace { solver, rows }))
}

struct SolverReport {
    solver: String,
    runs: usize,
    horizon: u64,
    metric: Option<&'static str>,
    slope: Option<f64>,
    r_squared: Option<f64>,
    final_objective: Option<f64>,
    final_metric: Option<f64>,
    queries_total: u64,
}

const REPORT_HEADER: &str =
    "solver,runs,horizon,metric,slope,r2,final_F_mean,final_metric_mean,queries_total";

fn build_reports(traces: &[ParsedTrace]) -> Vec<SolverReport> {
    let mut by_solver: BTreeMap<String, Vec<&ParsedTrace>> = BTreeMap::new();
    for t in traces {
        by_solver.entry(t.solver.clone()).or_default().push(t);
    }
    let mut reports = Vec::new();
    for (solver, runs) in by_solver {
        let horizon = runs.iter().map(|r| r.rows.len() as u64).max().unwrap_or(0);
        // Mean across runs at each t, for the first metric that every run
        // recorded: suboptimality, then gap, then surrogate error.
        type Getter = fn(&ParsedRow) -> Option<f64>;
        let extract: [(&'static str, Getter); 3] = [
            ("subopt", |r| r.subopt),
            ("fw_gap", |r| r.fw_gap),
            ("grad_err_sq", |r| r.grad_err_sq),
        ];
        let mut metric = None;
        let mut slope = None;
        let mut r_squared = None;
        for (name, get) in extract {
            let complete = runs
                .iter()
                .all(|run| run.rows.iter().all(|row| get(row).is_some()));
            if !complete {
                continue;
            }
            let mut series = Vec::new();
            for ti in 0..horizon as usize {
                let t = runs.iter().find_map(|run| run.rows.get(ti).map(|r| r.t));
                let vals: Vec<f64> =
                    runs.iter().filter_map(|run| run.rows.get(ti)).filter_map(get).collect();
                if let (Some(t), false) = (t, vals.is_empty()) {
                    let (m, _) = mean_and_se(&vals);
                    series.push((t as f64, m));
                }
            }
            // Positive tail only: log-log fits reject zeros, and early
            // rows may sit exactly at the start value.
            let window = ((horizon as f64 / 100.0).max(2.0), horizon as f64);
            let positive: Vec<(f64, f64)> =
                series.into_iter().filter(|(_, v)| *v > 0.0).collect();
            if let Ok(fit) = rate_fit(&positive, window) {
                metric = Some(name);
                slope = Some(fit.slope);
                r_squared = Some(fit.r_squared);
                break;
            }
        }
        let finals_obj: Vec<f64> =
            runs.iter().filter_map(|r| r.rows.last().and_then(|row| row.objective)).collect();
        let final_objective = if finals_obj.is_empty() {
            None
        } else {
            Some(mean_and_se(&finals_obj).0)
        };
        let final_metric = metric.and_then(|name| {
            let get = extract.iter().find(|(n, _)| *n == name).unwrap().1;
            let vals: Vec<f64> =
                runs.iter().filter_map(|r| r.rows.last().and_then(get)).collect();
            if vals.is_empty() {
                None
            } else {
                Some(mean_and_se(&vals).0)
            }
        });
        reports.push(SolverReport {
            solver,
            runs: runs.len(),
            horizon,
            metric,
            slope,
            r_squared,
            final_objective,
            final_metric,
            queries_total: runs.iter().filter_map(|r| r.rows.last().map(|row| row.queries)).sum(),
        });
    }
    reports
}

fn report_csv(reports: &[SolverReport]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.solver,
            r.runs,
            r.horizon,
            r.metric.unwrap_or(""),
            opt(r.slope),
            opt(r.r_squared),
            opt(r.final_objective),
            opt(r.final_metric),
            r.queries_total,
        ));
    }
    out
}

fn report_text(reports: &[SolverReport]) -> String {
    let mut out = format!(
        "{:<20} {:>5} {:>8} {:<12} {:>8} {:>6} {:>14} {:>14} {:>10}\n",
        "solver", "runs", "horizon", "metric", "slope", "r2", "final F", "final metric", "queries"
    );
    let opt = |v: Option<f64>, prec: usize| match v {
        Some(x) => format!("{x:.prec$}"),
        None => "-".into(),
    };
    let opte = |v: Option<f64>| match v {
        Some(x) => format!("{x:.4e}"),
        None => "-".into(),
    };
    for r in reports {
        out.push_str(&format!(
            "{:<20} {:>5} {:>8} {:<12} {:>8} {:>6} {:>14} {:>14} {:>10}\n",
            r.solver,
            r.runs,
            r.horizon,
            r.metric.unwrap_or("-"),
            opt(r.slope, 3),
            opt(r.r_squared, 3),
            opte(r.final_objective),
            opte(r.final_metric),
            r.queries_total,
        ));
    }
    out
}

/// Aggregates every trace in `dir` and writes `report.csv` / `report.txt`
/// beside them, echoing the text table to stdout.
pub fn cmd_report(dir: &Path) -> Result<(), ReportError> {
    let entries = std::fs::read_dir(dir).map_err(|e| ReportError::Io(dir.into(), e))?;
    let mut traces = Vec::new();
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    for path in paths {
        if let Some(trace) = parse_trace(&path)? {
            traces.push(trace);
        }
    }
    if traces.is_empty() {
        return Err(ReportError::NoTraces(dir.into()));
    }
    let reports = build_reports(&traces);
    let csv = report_csv(&reports);
    let txt = report_text(&reports);
    let csv_path = dir.join("report.csv");
    std::fs::write(&csv_path, csv).map_err(|e| ReportError::Io(csv_path.clone(), e))?;
    let txt_path = dir.join("report.txt");
    std::fs::write(&txt_path, &txt).map_err(|e| ReportError::Io(txt_path.clone(), e))?;
    print!("{txt}");
    Ok(())
}
