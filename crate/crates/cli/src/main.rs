//! Benchmark and verification harness for the projection-free stochastic
//! solvers.
//!
//! ```text
//! sfw run <config> [--workers N] [--out DIR]   execute an experiment file
//! sfw verify <suite>                           run a verification suite
//! sfw report <dir>                             aggregate a trace directory
//! ```

mod config;
mod output;
mod report;
mod runner;

use sfw_core::acceptance;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
usage: sfw <command> [args]

commands:
  run <config> [--workers N] [--out DIR]
      Execute every (solver x seed) cell of the experiment config, writing
      one trace file per cell plus a cross-seed summary.
  verify <suite>
      Run a verification suite and print one PASS/FAIL line per check.
      Suites: unbiasedness | rates | bounds | all
  report <dir>
      Aggregate the trace files in a directory into a comparison table
      (per-solver rate fits, final metrics, query counts).
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("run") => cmd_run(&args[1..]),
        Some("verify") => cmd_verify(&args[1..]),
        Some("report") => cmd_report(&args[1..]),
        Some("help") | Some("--help") | Some("-h") => {
            print!("{USAGE}");
            ExitCode::SUCCESS
        }
        Some(other) => {
            eprintln!("unknown command `{other}`\n{USAGE}");
            ExitCode::from(2)
        }
        None => {
            eprint!("{USAGE}");
            ExitCode::from(2)
        }
    }
}

fn cmd_run(args: &[String]) -> ExitCode {
    let mut config_path: Option<PathBuf> = None;
    let mut workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut out: Option<PathBuf> = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--workers" => match it.next().and_then(|v| v.parse::<usize>().ok()) {
                Some(n) if n >= 1 => workers = n,
                _ => {
                    eprintln!("--workers expects a positive integer");
                    return ExitCode::from(2);
                }
            },
            "--out" => match it.next() {
                Some(dir) => out = Some(PathBuf::from(dir)),
                None => {
                    eprintln!("--out expects a directory");
                    return ExitCode::from(2);
                }
            },
            other if config_path.is_none() && !other.starts_with('-') => {
                config_path = Some(PathBuf::from(other));
            }
            other => {
                eprintln!("unexpected argument `{other}`\n{USAGE}");
                return ExitCode::from(2);
            }
        }
    }
    let Some(config_path) = config_path else {
        eprintln!("run: missing config path\n{USAGE}");
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let experiment = match config::parse_experiment(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    match runner::cmd_run(&experiment, workers, out) {
        Ok(cells) => {
            eprintln!("completed {cells} cell(s)");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_verify(args: &[String]) -> ExitCode {
    let Some(suite) = args.first() else {
        eprintln!("verify: missing suite name (one of {:?})", acceptance::SUITES);
        return ExitCode::from(2);
    };
    let Some(reports) = acceptance::run_suite(suite) else {
        eprintln!("verify: unknown suite `{suite}` (one of {:?})", acceptance::SUITES);
        return ExitCode::from(2);
    };
    let mut all_passed = true;
    for report in &reports {
        println!("{}", report.line());
        all_passed &= report.passed;
    }
    if all_passed {
        println!("{} check(s) passed", reports.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed");
        ExitCode::FAILURE
    }
}

fn cmd_report(args: &[String]) -> ExitCode {
    let Some(dir) = args.first() else {
        eprintln!("report: missing directory");
        return ExitCode::from(2);
    };
    match report::cmd_report(&PathBuf::from(dir)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("report failed: {e}");
            ExitCode::FAILURE
        }
    }
}
