//! CSV and JSON renderings of matrix, sweep, sensitivity and ECP results.
//!
//! Every writer is a pure function of its input, so identical results give
//! byte-identical files. Numbers in CSV use 6 decimals.

use serde_json::{json, Value};

use super::{summarize, worst_case, EcpReport, MatrixReport, RunOutcome, SensitivityReport, SweepResult};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn f6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn opt6(v: Option<f64>) -> String {
    v.map(f6).unwrap_or_default()
}

fn outcome_fields(outcome: &RunOutcome) -> String {
    match outcome {
        RunOutcome::Completed { result, score } => format!(
            "ok,{},{},{},{},{},{}",
            u8::from(result.collided),
            f6(result.impact_speed),
            f6(score.points),
            serde_json::to_value(score.outcome).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            opt6(result.trigger_ttc),
            f6(result.min_gap)
        ),
        RunOutcome::Failed { .. } => "failed,,,,,,".into(),
    }
}

const OUTCOME_HEADER: &str = "status,collided,impact_speed,points,score_outcome,trigger_ttc,min_gap";

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serialises");
    s.push('\n');
    s
}

pub fn matrix_csv(report: &MatrixReport) -> String {
    let mut out = format!("id,kind,vut_speed_kmh,target_speed_kmh,seed,{OUTCOME_HEADER}\n");
    for e in &report.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.spec.id,
            e.spec.kind.keyword(),
            f6(e.spec.vut_speed * 3.6),
            f6(e.spec.target_speed * 3.6),
            e.seed,
            outcome_fields(&e.outcome)
        ));
    }
    out
}

pub fn matrix_json(report: &MatrixReport) -> String {
    let n = report.entries.len();
    let total = report.total_points();
    pretty(&json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "cases": n,
        "failed": report.failed(),
        "total_points": total,
        "mean_points": if n > 0 { total / n as f64 } else { 0.0 },
        "entries": serde_json::to_value(&report.entries).expect("entries serialise"),
    }))
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let paths: Vec<&str> = result.plan.ranges.iter().map(|r| r.path.as_str()).collect();
    let mut out = String::from("index,id,seed");
    for p in &paths {
        out.push(',');
        out.push_str(p);
    }
    out.push(',');
    out.push_str(OUTCOME_HEADER);
    out.push('\n');
    for run in &result.runs {
        out.push_str(&format!("{},{},{}", run.point.index, run.point.spec.id, run.seed));
        for v in &run.point.values {
            out.push(',');
            out.push_str(&f6(*v));
        }
        out.push(',');
        out.push_str(&outcome_fields(&run.outcome));
        out.push('\n');
    }
    out
}

pub fn sweep_summary_json(result: &SweepResult) -> String {
    let s = summarize(result);
    let worst = worst_case(result).map(|(spec, score)| {
        json!({ "id": spec.id, "points": score.points, "impact_speed": score.impact_speed })
    });
    let failures: Vec<Value> = result
        .runs
        .iter()
        .filter_map(|r| match &r.outcome {
            RunOutcome::Failed { error } => Some(json!({ "id": r.point.spec.id, "error": error })),
            RunOutcome::Completed { .. } => None,
        })
        .collect();
    pretty(&json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "base_id": result.plan.base.id,
        "strategy": result.plan.strategy,
        "seed": result.plan.seed,
        "runs": result.runs.len(),
        "points": s,
        "worst_case": worst,
        "failures": failures,
    }))
}

pub fn sensitivity_csv(report: &SensitivityReport) -> String {
    let mut out = String::from("parameter,level,mean_points,n\n");
    for p in &report.parameters {
        for l in &p.levels {
            out.push_str(&format!("{},{},{},{}\n", p.path, f6(l.level), f6(l.mean_points), l.n));
        }
    }
    out
}

pub fn sensitivity_json(report: &SensitivityReport) -> String {
    let effects: Vec<Value> =
        report.parameters.iter().map(|p| json!({ "parameter": p.path, "main_effect": p.main_effect })).collect();
    pretty(&json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "ranking": report.ranking,
        "main_effects": effects,
    }))
}

pub fn ecp_csv(report: &EcpReport) -> String {
    let mut out = String::from("offset,class,trigger_ttc,impact_speed,points,collided\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{:?},{},{},{},{}\n",
            f6(r.offset),
            r.class,
            opt6(r.trigger_ttc),
            f6(r.impact_speed),
            f6(r.points),
            u8::from(r.collided)
        ));
    }
    out
}

pub fn ecp_json(report: &EcpReport) -> String {
    let mut v = serde_json::to_value(report).expect("ecp report serialises");
    v["schema_version"] = json!(REPORT_SCHEMA_VERSION);
    pretty(&v)
}
