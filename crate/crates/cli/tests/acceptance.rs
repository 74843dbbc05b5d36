//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Criteria 5 and 7 drive the `aebsim` binary; the rest call the
//! library directly.

#[path = "../../core/tests/common/corpus.rs"]
mod corpus;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use aebsim::dynamics::BrakeConfig;
use aebsim::engine::{run, run_summary, write_trace_csv};
use aebsim::evaluation::{ecp_demo, main_effects, report, run_matrix, sweep};
use aebsim::parallel::Parallelism;
use aebsim::perception::SensorMode;
use aebsim::scenario::sweep::DEFAULT_RUN_CAP;
use aebsim::scenario::{parse_scenario, TestMatrix};
use aebsim::{ScenarioSpec, SimConfig};

const V50: f64 = 50.0 / 3.6;

type Check = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Check);

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn aebsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_aebsim")).args(args).env_remove("AEBSIM_SEED").output().expect("spawn aebsim")
}

fn forced(ttc: f64) -> SimConfig {
    let mut cfg = SimConfig { brake: BrakeConfig::ideal(), ..Default::default() };
    cfg.decision.forced_trigger_ttc = Some(ttc);
    cfg
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{name} = {got:.4}, expected {want} ± {tol}"))
    }
}

fn c1_mitigation() -> Check {
    let r = run_summary(&ScenarioSpec::ccrs("ccrs50", V50), &forced(0.5), 42).map_err(|e| e.to_string())?;
    if !r.collided {
        return Err("run avoided the collision".into());
    }
    within("impact_speed", r.impact_speed, 8.240, 0.05)?;
    Ok(format!("impact {:.4} m/s", r.impact_speed))
}

fn c2_avoidance() -> Check {
    let r = run_summary(&ScenarioSpec::ccrs("ccrs50", V50), &forced(1.2), 42).map_err(|e| e.to_string())?;
    if r.collided {
        return Err(format!("collided at {:.3} m/s", r.impact_speed));
    }
    within("min_gap", r.min_gap, 5.95, 0.05)?;
    Ok(format!("avoided, min_gap {:.4} m", r.min_gap))
}

fn c3_ecp() -> Check {
    let rep = ecp_demo(&ScenarioSpec::ccrs("ccrs50", V50), &[0.0, 0.75], &SimConfig::default()).map_err(|e| e.to_string())?;
    let (a, b) = (&rep.rows[0], &rep.rows[1]);
    let ta = a.trigger_ttc.ok_or("offset 0 never triggered")?;
    let tb = b.trigger_ttc.ok_or("offset 0.75 never triggered")?;
    within("trigger_ttc(0 m)", ta, 0.7716, 0.01)?;
    within("trigger_ttc(0.75 m)", tb, 0.6481, 0.01)?;
    if rep.max_impact_difference < 5.0 {
        return Err(format!("impact difference {:.3} m/s < 5", rep.max_impact_difference));
    }
    Ok(format!(
        "impacts {:.3} / {:.3} m/s (diff {:.3}), trigger ttc {ta:.4} / {tb:.4} s",
        a.impact_speed, b.impact_speed, rep.max_impact_difference
    ))
}

fn c4_monotonic() -> Check {
    let spec = ScenarioSpec::ccrs("ccrs50", V50);
    let mut impacts = Vec::new();
    for i in 1..=12 {
        let r = run_summary(&spec, &forced(i as f64 / 10.0), 42).map_err(|e| e.to_string())?;
        impacts.push(r.impact_speed);
    }
    let violations = impacts.windows(2).filter(|w| w[1] > w[0]).count();
    if violations > 0 {
        return Err(format!("{violations} violations in {impacts:.3?}"));
    }
    Ok(format!("0 violations over 12 trigger TTCs ({:.3} .. {:.3} m/s)", impacts[0], impacts[11]))
}

fn c5_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scenario = fixture("mc_offsets.dsl");
    let mut outs = Vec::new();
    for jobs in ["1", "8"] {
        let out = dir.path().join(format!("jobs{jobs}"));
        let o = aebsim(&["sweep", "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs]);
        if !o.status.success() {
            return Err(format!("sweep --jobs {jobs} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
        }
        outs.push(out);
    }
    let mut rows = 0;
    for name in ["sweep.csv", "sweep_summary.json"] {
        let a = fs::read(outs[0].join(name)).map_err(|e| e.to_string())?;
        let b = fs::read(outs[1].join(name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{name} differs between --jobs 1 and --jobs 8"));
        }
        if name == "sweep.csv" {
            rows = a.iter().filter(|&&c| c == b'\n').count() - 1;
        }
    }
    if rows != 1000 {
        return Err(format!("expected 1000 runs, got {rows}"));
    }
    Ok(format!("{rows} runs, report files byte-identical"))
}

fn c6_dt_convergence() -> Check {
    let m = TestMatrix::default();
    let a = run_matrix(&m, &SimConfig::default(), 42, Parallelism::Auto);
    let b = run_matrix(&m, &SimConfig { dt: 5e-4, ..Default::default() }, 42, Parallelism::Auto);
    let mut worst = (0.0f64, String::new());
    for (x, y) in a.entries.iter().zip(&b.entries) {
        let ix = x.outcome.completed().ok_or(format!("{} failed at 1 ms", x.spec.id))?.0.impact_speed;
        let iy = y.outcome.completed().ok_or(format!("{} failed at 0.5 ms", y.spec.id))?.0.impact_speed;
        if (ix - iy).abs() > worst.0 {
            worst = ((ix - iy).abs(), x.spec.id.clone());
        }
    }
    if worst.0 >= 0.05 {
        return Err(format!("{}: |Δimpact| = {:.4} m/s", worst.1, worst.0));
    }
    Ok(format!("{} cases, max |Δimpact| {:.4} m/s ({})", a.entries.len(), worst.0, worst.1))
}

fn c7_regression() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base_dir = dir.path().join("base");
    let o = aebsim(&["baseline", "--out", base_dir.to_str().unwrap()]);
    if !o.status.success() {
        return Err(format!("baseline exited {:?}", o.status.code()));
    }
    let baseline = base_dir.join("baseline.json");
    let same = dir.path().join("same");
    let o = aebsim(&["regress", "--baseline", baseline.to_str().unwrap(), "--out", same.to_str().unwrap()]);
    if o.status.code() != Some(0) {
        return Err(format!("unchanged rerun exited {:?}", o.status.code()));
    }
    let changed = dir.path().join("changed");
    let cfg = fixture("full_decel_8.toml");
    let o = aebsim(&[
        "regress",
        "--baseline",
        baseline.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        changed.to_str().unwrap(),
    ]);
    if o.status.code() != Some(1) {
        return Err(format!("full_decel 8 rerun exited {:?}, expected 1", o.status.code()));
    }
    let base: serde_json::Value = serde_json::from_slice(&fs::read(&baseline).unwrap()).unwrap();
    let reg: serde_json::Value = serde_json::from_slice(&fs::read(changed.join("regression.json")).unwrap()).unwrap();
    let flagged: Vec<&str> = reg["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["status"] != "pass")
        .map(|e| e["spec_id"].as_str().unwrap())
        .collect();
    let colliding: Vec<&str> = base["entries"]
        .as_object()
        .unwrap()
        .iter()
        .filter(|(_, e)| e["impact_speed"].as_f64().unwrap() > 0.0)
        .map(|(id, _)| id.as_str())
        .collect();
    let missed: Vec<&&str> = colliding.iter().filter(|id| !flagged.contains(id)).collect();
    if colliding.is_empty() || !missed.is_empty() {
        return Err(format!("colliding cases not flagged: {missed:?} (colliding: {})", colliding.len()));
    }
    Ok(format!("exit 0 unchanged, exit 1 after change; {} colliding cases all flagged ({} flagged total)", colliding.len(), flagged.len()))
}

fn c8_parser() -> Check {
    let (valid, malformed) = corpus::run_corpus().map_err(|e| e.join("; "))?;
    if valid < 10 || malformed < 5 {
        return Err(format!("corpus too small: {valid} valid, {malformed} malformed"));
    }
    let errors = corpus::fixpoint(1000, 8);
    if !errors.is_empty() {
        return Err(format!("{} fixpoint failures, first: {}", errors.len(), errors[0]));
    }
    Ok(format!("{valid} golden files, {malformed} positioned errors, 1000/1000 fixpoints"))
}

fn c9_sensitivity() -> Check {
    let text = fs::read_to_string(fixture("oat_offset_speed.dsl")).map_err(|e| e.to_string())?;
    let (_, plan) = parse_scenario(&text).map_err(|e| e.to_string())?;
    let plan = plan.ok_or("fixture has no sweep")?;
    let result = sweep(&plan, &SimConfig::default(), Parallelism::Auto, DEFAULT_RUN_CAP).map_err(|e| e.to_string())?;
    let rep = main_effects(&result);
    let off = rep.effect("target.lateral_offset").ok_or("offset missing")?;
    let speed = rep.effect("vut.speed").ok_or("speed missing")?;
    if off <= speed {
        return Err(format!("main effect offset {off:.4} <= speed {speed:.4}"));
    }
    Ok(format!("main effect offset {off:.4} > speed {speed:.4}"))
}

fn trace_bytes(spec: &ScenarioSpec, cfg: &SimConfig, seed: u64) -> Result<Vec<u8>, String> {
    let (_, trace) = run(spec, cfg, seed).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_trace_csv(&trace, &mut buf).map_err(|e| e.to_string())?;
    Ok(buf)
}

fn c10_noise_degeneracy() -> Check {
    let ideal = SimConfig::default();
    let mut noisy = SimConfig::default();
    noisy.sensor.mode = SensorMode::Noisy;
    let m = TestMatrix::default();
    for spec in &m.entries {
        if trace_bytes(spec, &ideal, 42)? != trace_bytes(spec, &noisy, 42)? {
            return Err(format!("{}: traces differ", spec.id));
        }
    }
    let a = report::matrix_csv(&run_matrix(&m, &ideal, 42, Parallelism::Auto));
    let b = report::matrix_csv(&run_matrix(&m, &noisy, 42, Parallelism::Auto));
    if a != b {
        return Err("matrix reports differ".into());
    }
    Ok(format!("{} traces and the matrix report byte-identical", m.entries.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "kinematic oracle, mitigation", Duration::from_secs(1), c1_mitigation),
        (2, "kinematic oracle, avoidance", Duration::from_secs(1), c2_avoidance),
        (3, "ECP counterexample", Duration::from_secs(1), c3_ecp),
        (4, "impact monotone in trigger TTC", Duration::from_secs(5), c4_monotonic),
        (5, "sweep determinism across parallelism", Duration::from_secs(60), c5_determinism),
        (6, "dt convergence on the matrix", Duration::from_secs(60), c6_dt_convergence),
        (7, "regression harness exit codes", Duration::from_secs(60), c7_regression),
        (8, "parser suite", Duration::from_secs(10), c8_parser),
        (9, "sensitivity ranks offset above speed", Duration::from_secs(5), c9_sensitivity),
        (10, "noise degeneracy", Duration::from_secs(30), c10_noise_degeneracy),
    ];
    let mut failed = 0;
    for (n, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
