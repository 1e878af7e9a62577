//! Trace and summary serialization.
//!
//! The trace CSV schema is fixed and versioned by its header line; absent
//! metrics serialize as empty fields. Floats use Rust's shortest
//! round-trip formatting, so identical runs produce byte-identical files.

use sfw_core::solver::Trace;

/// Fixed trace schema.
pub const TRACE_HEADER: &str = "run_id,solver,seed,t,rho,eta,delta,F,subopt,fw_gap,grad_err_sq,queries";

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn json_num(v: f64) -> String {
    if v.is_finite() {
        fmt_f64(v)
    } else {
        "null".into()
    }
}

fn json_opt(v: Option<f64>) -> String {
    v.map(json_num).unwrap_or_else(|| "null".into())
}

pub fn trace_csv(run_id: &str, solver: &str, seed: u64, trace: &Trace) -> String {
    let mut out = String::with_capacity(64 * (trace.rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for row in &trace.rows {
        out.push_str(&format!(
            "{run_id},{solver},{seed},{},{},{},{},{},{},{},{},{}\n",
            row.t,
            fmt_opt(row.rho),
            fmt_f64(row.eta),
            fmt_opt(row.delta_step),
            fmt_opt(row.objective),
            fmt_opt(row.suboptimality),
            fmt_opt(row.fw_gap),
            fmt_opt(row.grad_error_sq),
            row.queries,
        ));
    }
    out
}

pub fn trace_json(run_id: &str, solver: &str, seed: u64, trace: &Trace) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{{\n  \"run_id\": \"{run_id}\",\n  \"solver\": \"{solver}\",\n  \"seed\": {seed},\n  \"rows\": [\n"
    ));
    for (i, row) in trace.rows.iter().enumerate() {
        out.push_str(&format!(
            "    {{\"t\": {}, \"rho\": {}, \"eta\": {}, \"delta\": {}, \"F\": {}, \"subopt\": {}, \"fw_gap\": {}, \"grad_err_sq\": {}, \"queries\": {}}}{}\n",
            row.t,
            json_opt(row.rho),
            json_num(row.eta),
            json_opt(row.delta_step),
            json_opt(row.objective),
            json_opt(row.suboptimality),
            json_opt(row.fw_gap),
            json_opt(row.grad_error_sq),
            row.queries,
            if i + 1 < trace.rows.len() { "," } else { "" },
        ));
    }
    out.push_str("  ]\n}\n");
    out
}

/// One summary line per solver: final metrics aggregated across seeds.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub solver: String,
    pub mode: String,
    pub horizon: u64,
    pub seeds: u64,
    pub final_f: Option<(f64, f64)>,
    pub final_subopt: Option<(f64, f64)>,
    pub final_fw_gap: Option<(f64, f64)>,
    pub queries_total: u64,
}

pub const SUMMARY_HEADER: &str = "solver,mode,horizon,seeds,final_F_mean,final_F_se,final_subopt_mean,final_subopt_se,final_fw_gap_mean,final_fw_gap_se,queries_total";

fn fmt_pair(v: Option<(f64, f64)>) -> String {
    match v {
        Some((m, se)) => format!("{},{}", fmt_f64(m), fmt_f64(se)),
        None => ",".into(),
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.solver,
            r.mode,
            r.horizon,
            r.seeds,
            fmt_pair(r.final_f),
            fmt_pair(r.final_subopt),
            fmt_pair(r.final_fw_gap),
            r.queries_total,
        ));
    }
    out
}

pub fn summary_text(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<20} {:<14} {:>8} {:>6} {:>24} {:>24} {:>24} {:>12}\n",
        "solver", "mode", "horizon", "seeds", "final F (mean+-se)", "subopt (mean+-se)", "fw gap (mean+-se)", "queries"
    ));
    let pair = |v: Option<(f64, f64)>| match v {
        Some((m, se)) => format!("{m:.6e} +- {se:.1e}"),
        None => "-".into(),
    };
    for r in rows {
        out.push_str(&format!(
            "{:<20} {:<14} {:>8} {:>6} {:>24} {:>24} {:>24} {:>12}\n",
            r.solver,
            r.mode,
            r.horizon,
            r.seeds,
            pair(r.final_f),
            pair(r.final_subopt),
            pair(r.final_fw_gap),
            r.queries_total,
        ));
    }
    out
}

pub fn summary_json(rows: &[SummaryRow]) -> String {
    let mut out = String::from("[\n");
    let jpair = |v: Option<(f64, f64)>| match v {
        Some((m, se)) => format!("{{\"mean\": {}, \"se\": {}}}", json_num(m), json_num(se)),
        None => "null".into(),
    };
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!(
            "  {{\"solver\": \"{}\", \"mode\": \"{}\", \"horizon\": {}, \"seeds\": {}, \"final_F\": {}, \"final_subopt\": {}, \"final_fw_gap\": {}, \"queries_total\": {}}}{}\n",
            r.solver,
            r.mode,
            r.horizon,
            r.seeds,
            jpair(r.final_f),
            jpair(r.final_subopt),
            jpair(r.final_fw_gap),
            r.queries_total,
            if i + 1 < rows.len() { "," } else { "" },
        ));
    }
    out.push_str("]\n");
    out
}
