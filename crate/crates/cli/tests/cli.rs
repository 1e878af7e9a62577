//! End-to-end checks of the `sfw` binary: exit codes, file contracts,
//! reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sfw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sfw"))
}

fn scratch_dir(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sfw-cli-{label}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const MINIMAL: &str = "
[problem]
name = oblivious_quadratic
dim = 5
data_seed = 7
noise = 0.5

[constraint]
kind = unit_simplex
scale = 1.0

[solver]
algorithm = one_sfw
mode = convex_min
horizon = 100
record_exact = true

[sweep]
seeds = 1
base_seed = 3
";

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn sfw");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn minimal_run_writes_expected_rows() {
    let dir = scratch_dir("minimal");
    let cfg = write_config(&dir, "exp.conf", MINIMAL);
    let out_dir = dir.join("out");
    run_ok(sfw().args(["run"]).arg(&cfg).args(["--out"]).arg(&out_dir));

    let trace = std::fs::read_to_string(out_dir.join("trace_one_sfw-s000.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines.len(), 101, "header plus one row per iteration");
    assert!(lines[0].starts_with("run_id,solver,seed,t,rho,eta,delta"));
    let last: Vec<&str> = lines[100].split(',').collect();
    assert_eq!(last[3], "100");
    assert_eq!(last[11], "100", "queries column equals the iteration count");
    assert!(out_dir.join("summary.csv").exists());
    assert!(out_dir.join("summary.txt").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn rerun_is_byte_identical() {
    let dir = scratch_dir("rerun");
    let cfg = write_config(&dir, "exp.conf", MINIMAL);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    run_ok(sfw().args(["run"]).arg(&cfg).args(["--out"]).arg(&out_a).args(["--workers", "2"]));
    run_ok(sfw().args(["run"]).arg(&cfg).args(["--out"]).arg(&out_b).args(["--workers", "1"]));
    for name in ["trace_one_sfw-s000.csv", "summary.csv"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sweep_produces_one_trace_per_cell_and_one_summary_row_per_solver() {
    let dir = scratch_dir("sweep");
    let body = MINIMAL
        .replace("algorithm = one_sfw", "algorithm = one_sfw, momentum_fw")
        .replace("seeds = 1", "seeds = 3");
    let cfg = write_config(&dir, "exp.conf", &body);
    let out_dir = dir.join("out");
    run_ok(sfw().args(["run"]).arg(&cfg).args(["--out"]).arg(&out_dir).args(["--workers", "3"]));
    let traces = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("trace_"))
        .count();
    assert_eq!(traces, 6);
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3, "header plus one row per solver");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn unknown_solver_fails_with_field_name() {
    let dir = scratch_dir("badsolver");
    let body = MINIMAL.replace("algorithm = one_sfw", "algorithm = warp_drive");
    let cfg = write_config(&dir, "exp.conf", &body);
    let out = sfw().args(["run"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("algorithm"), "stderr: {stderr}");
    assert!(stderr.contains("warp_drive"), "stderr: {stderr}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn json_mirrors_written_when_requested() {
    let dir = scratch_dir("json");
    let body = format!("{MINIMAL}\n[output]\ndir = unused\nformats = csv, json\n");
    let cfg = write_config(&dir, "exp.conf", &body);
    let out_dir = dir.join("out");
    run_ok(sfw().args(["run"]).arg(&cfg).args(["--out"]).arg(&out_dir));
    assert!(out_dir.join("trace_one_sfw-s000.json").exists());
    assert!(out_dir.join("summary.json").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn report_aggregates_traces() {
    let dir = scratch_dir("report");
    let body = MINIMAL.replace("seeds = 1", "seeds = 4");
    let cfg = write_config(&dir, "exp.conf", &body);
    let out_dir = dir.join("out");
    run_ok(sfw().args(["run"]).arg(&cfg).args(["--out"]).arg(&out_dir));
    let out = run_ok(sfw().args(["report"]).arg(&out_dir));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("slope"), "stdout: {stdout}");
    let report = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(report.lines().next().unwrap().contains("slope"));
    assert_eq!(report.lines().count(), 2, "one row for the single solver");
    let row = report.lines().nth(1).unwrap();
    assert!(row.starts_with("one_sfw,4,100,"), "row: {row}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn report_on_traces_without_exact_diagnostics() {
    let dir = scratch_dir("noexact");
    let body = MINIMAL.replace("record_exact = true", "record_exact = false");
    let cfg = write_config(&dir, "exp.conf", &body);
    let out_dir = dir.join("out");
    run_ok(sfw().args(["run"]).arg(&cfg).args(["--out"]).arg(&out_dir));
    let out = run_ok(sfw().args(["report"]).arg(&out_dir));
    let stdout = String::from_utf8_lossy(&out.stdout);
    // Rate columns are marked absent but the command still succeeds.
    assert!(stdout.lines().skip(1).any(|l| l.contains('-')), "stdout: {stdout}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn report_on_empty_directory_fails() {
    let dir = scratch_dir("empty");
    let out = sfw().args(["report"]).arg(&dir).output().unwrap();
    assert!(!out.status.success());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn verify_unknown_suite_fails() {
    let out = sfw().args(["verify", "nosuchsuite"]).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("nosuchsuite"), "stderr: {stderr}");
}

#[test]
fn verify_unbiasedness_suite_passes() {
    let out = run_ok(sfw().args(["verify", "unbiasedness"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS hessian_estimator_unbiased"), "stdout: {stdout}");
    assert!(stdout.contains("PASS gradient_variation_unbiased"), "stdout: {stdout}");
}

#[test]
fn usage_without_arguments() {
    let out = sfw().output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage"));
}

#[test]
fn shipped_example_configs_parse_and_run_briefly() {
    // Truncated variants of the shipped configs: same sections, tiny
    // horizon, so the smoke test stays fast.
    let dir = scratch_dir("shipped");
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    for name in ["convex_quadratic.conf", "submodular_nqp.conf", "nonconvex_sigmoid.conf"] {
        let body = std::fs::read_to_string(root.join("configs").join(name)).unwrap();
        let body = body
            .replace("horizon = 2000", "horizon = 20")
            .replace("horizon = 1000", "horizon = 20")
            .replace("horizon = 5000", "horizon = 20")
            .replace("seeds = 10", "seeds = 2")
            .replace("seeds = 8", "seeds = 2");
        let cfg = write_config(&dir, name, &body);
        let out_dir = dir.join(name).with_extension("out");
        run_ok(sfw().args(["run"]).arg(&cfg).args(["--out"]).arg(&out_dir));
        assert!(out_dir.join("summary.txt").exists());
    }
    let _ = std::fs::remove_dir_all(&dir);
}
