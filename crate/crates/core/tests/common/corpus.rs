//! Golden DSL corpus checks and a random spec generator, shared by the core
//! integration tests and the CLI acceptance harness.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use aebsim::perception::SensorMode;
use aebsim::scenario::dsl::DslErrorKind;
use aebsim::scenario::{
    parse_scenario, render_document, InitialGap, OverrideValue, ParameterRange, ScenarioKind, ScenarioSpec, Spacing,
    SweepPlan, SweepStrategy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus")
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn num(t: &toml::Table, key: &str, default: f64) -> f64 {
    match t.get(key) {
        Some(toml::Value::Float(f)) => *f,
        Some(toml::Value::Integer(i)) => *i as f64,
        _ => default,
    }
}

fn check_override(path: &str, got: Option<&OverrideValue>, want: &toml::Value) -> Result<(), String> {
    let ok = match (got, want) {
        (Some(OverrideValue::Number(g)), toml::Value::Float(w)) => close(*g, *w),
        (Some(OverrideValue::Number(g)), toml::Value::Integer(w)) => close(*g, *w as f64),
        (Some(OverrideValue::Flag(g)), toml::Value::String(w)) => w == if *g { "true" } else { "false" },
        (Some(OverrideValue::Mode(m)), toml::Value::String(w)) => {
            w == match m {
                SensorMode::Ideal => "ideal",
                SensorMode::Noisy => "noisy",
            }
        }
        (Some(OverrideValue::Unset), toml::Value::String(w)) => w == "none",
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("override {path}: got {got:?}, want {want}"))
    }
}

fn check_valid(dir: &Path, case: &toml::Table) -> Result<(), String> {
    let file = case["file"].as_str().unwrap();
    let text = std::fs::read_to_string(dir.join("valid").join(file)).map_err(|e| format!("{file}: {e}"))?;
    let (spec, plan) = parse_scenario(&text).map_err(|e| format!("{file}: {e}"))?;
    let fail = |what: &str, got: String| Err(format!("{file}: {what} = {got}"));
    if spec.id != case["id"].as_str().unwrap() {
        return fail("id", spec.id.clone());
    }
    if spec.kind.keyword() != case["kind"].as_str().unwrap() {
        return fail("kind", spec.kind.to_string());
    }
    let fields = [
        ("vut_speed", spec.vut_speed, 0.0),
        ("target_speed", spec.target_speed, 0.0),
        ("target_decel", spec.target_decel, 0.0),
        ("lateral_offset", spec.lateral_offset, 0.0),
        ("vut_mass", spec.vut_mass, 1500.0),
        ("road_friction", spec.road_friction, 1.0),
        ("vut_width", spec.vut_width, 1.8),
        ("target_width", spec.target_width, 1.8),
    ];
    for (key, got, default) in fields {
        if !close(got, num(case, key, default)) {
            return fail(key, got.to_string());
        }
    }
    let gap_ok = match (spec.initial_gap, case.get("initial_gap")) {
        (InitialGap::Auto, None) => true,
        (InitialGap::Fixed(g), Some(_)) => close(g, num(case, "initial_gap", f64::NAN)),
        _ => false,
    };
    if !gap_ok {
        return fail("initial_gap", format!("{:?}", spec.initial_gap));
    }
    let empty = toml::Table::new();
    let overrides = case.get("overrides").and_then(|v| v.as_table()).unwrap_or(&empty);
    if overrides.len() != spec.overrides.len() {
        return fail("override count", spec.overrides.len().to_string());
    }
    for (path, want) in overrides {
        check_override(path, spec.overrides.get(path), want).map_err(|e| format!("{file}: {e}"))?;
    }
    match (plan, case.get("sweep").and_then(|v| v.as_table())) {
        (None, None) => Ok(()),
        (Some(plan), Some(want)) => {
            let strategy = serde_json::to_value(plan.strategy).unwrap();
            if strategy.as_str() != want["strategy"].as_str() {
                return fail("strategy", strategy.to_string());
            }
            if plan.seed as i64 != want["seed"].as_integer().unwrap() {
                return fail("seed", plan.seed.to_string());
            }
            if plan.run_count() as i64 != want["runs"].as_integer().unwrap() {
                return fail("run count", plan.run_count().to_string());
            }
            let ranges = want["ranges"].as_array().unwrap();
            if ranges.len() != plan.ranges.len() {
                return fail("range count", plan.ranges.len().to_string());
            }
            for (r, w) in plan.ranges.iter().zip(ranges) {
                let w = w.as_table().unwrap();
                let spacing_ok = match r.spacing {
                    Spacing::Step(s) => close(s, num(w, "step", f64::NAN)),
                    Spacing::Samples(n) => w.get("samples").and_then(|v| v.as_integer()) == Some(n as i64),
                };
                if r.path != w["path"].as_str().unwrap()
                    || !close(r.lo, num(w, "lo", f64::NAN))
                    || !close(r.hi, num(w, "hi", f64::NAN))
                    || !spacing_ok
                {
                    return fail("range", format!("{r:?}"));
                }
            }
            Ok(())
        }
        (got, _) => fail("sweep", format!("{got:?}")),
    }
}

fn check_malformed(dir: &Path, case: &toml::Table) -> Result<(), String> {
    let file = case["file"].as_str().unwrap();
    let text = std::fs::read_to_string(dir.join("malformed").join(file)).map_err(|e| format!("{file}: {e}"))?;
    let err = match parse_scenario(&text) {
        Ok(_) => return Err(format!("{file}: parsed but should fail")),
        Err(e) => e,
    };
    let kind = match err.kind {
        DslErrorKind::Syntax => "syntax",
        DslErrorKind::Semantic => "semantic",
        DslErrorKind::Unit => "unit",
    };
    let want = (case["kind"].as_str().unwrap(), case["line"].as_integer().unwrap(), case["column"].as_integer().unwrap());
    if (kind, err.line as i64, err.column as i64) != want {
        return Err(format!("{file}: got `{err}`, want {} at {}:{}", want.0, want.1, want.2));
    }
    Ok(())
}

/// Check every corpus file. Returns (valid count, malformed count) or the
/// list of failures.
pub fn run_corpus() -> Result<(usize, usize), Vec<String>> {
    let dir = corpus_dir();
    let expected: toml::Table = std::fs::read_to_string(dir.join("expected.toml")).unwrap().parse().unwrap();
    let valid = expected["valid"].as_array().unwrap();
    let malformed = expected["malformed"].as_array().unwrap();
    let mut errors = Vec::new();
    for case in valid {
        errors.extend(check_valid(&dir, case.as_table().unwrap()).err());
    }
    for case in malformed {
        errors.extend(check_malformed(&dir, case.as_table().unwrap()).err());
    }
    // every file on disk must have an expectation
    for (sub, cases) in [("valid", valid), ("malformed", malformed)] {
        for entry in std::fs::read_dir(dir.join(sub)).unwrap() {
            let name = entry.unwrap().file_name().into_string().unwrap();
            if !cases.iter().any(|c| c["file"].as_str() == Some(name.as_str())) {
                errors.push(format!("{sub}/{name}: no expectation"));
            }
        }
    }
    if errors.is_empty() {
        Ok((valid.len(), malformed.len()))
    } else {
        Err(errors)
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

/// A random valid scenario, optionally with a sweep plan.
pub fn random_document(rng: &mut ChaCha8Rng, index: usize) -> (ScenarioSpec, Option<SweepPlan>) {
    let kind = pick(rng, &[ScenarioKind::Ccrs, ScenarioKind::Ccrm, ScenarioKind::Ccrb]);
    let v = rng.random_range(1.0..80.0);
    let mut spec = match kind {
        ScenarioKind::Ccrs => ScenarioSpec::ccrs(format!("s{index}"), v),
        ScenarioKind::Ccrm => ScenarioSpec::new(format!("m{index}"), kind, v, rng.random_range(0.0..v)),
        ScenarioKind::Ccrb => ScenarioSpec::ccrb(format!("b{index}"), v, rng.random_range(1.0..60.0), rng.random_range(0.5..10.0)),
    };
    if kind != ScenarioKind::Ccrb && rng.random_bool(0.5) {
        spec.initial_gap = InitialGap::Fixed(rng.random_range(5.0..200.0));
    }
    spec.lateral_offset = rng.random_range(-3.0..3.0);
    spec.vut_mass = rng.random_range(800.0..3000.0);
    spec.road_friction = rng.random_range(0.1..1.5);
    spec.vut_width = rng.random_range(1.4..2.6);
    spec.target_width = rng.random_range(1.4..2.6);
    let overrides: [(&str, OverrideValue); 10] = [
        ("sensor.mode", OverrideValue::Mode(pick(rng, &[SensorMode::Ideal, SensorMode::Noisy]))),
        ("sensor.range_noise_sigma", OverrideValue::Number(rng.random_range(0.0..1.0))),
        ("sensor.dropout_prob", OverrideValue::Number(rng.random_range(0.0..0.5))),
        ("sensor.fov_half_angle", OverrideValue::Number(rng.random_range(0.1..1.5))),
        ("decision.full_decel", OverrideValue::Number(rng.random_range(5.0..10.0))),
        ("decision.latch_full_brake", OverrideValue::Flag(rng.random_bool(0.5))),
        ("decision.forced_trigger_ttc", if rng.random_bool(0.5) { OverrideValue::Unset } else { OverrideValue::Number(rng.random_range(0.1..2.0)) }),
        ("brake.delay", OverrideValue::Number(rng.random_range(0.0..0.5))),
        ("brake.jerk_limit", OverrideValue::Number(if rng.random_bool(0.3) { f64::INFINITY } else { rng.random_range(10.0..100.0) })),
        ("brake.max_force", OverrideValue::Number(rng.random_range(5000.0..20000.0))),
    ];
    for (path, value) in overrides {
        if rng.random_bool(0.3) {
            spec.overrides.insert(path.to_string(), value);
        }
    }
    let plan = if rng.random_bool(0.4) {
        let strategy = pick(rng, &[SweepStrategy::FullGrid, SweepStrategy::MonteCarlo, SweepStrategy::OneAtATime]);
        let samples = rng.random_range(1..50);
        let mk = |rng: &mut ChaCha8Rng, path: &str, lo: f64, hi: f64| {
            if strategy == SweepStrategy::MonteCarlo {
                ParameterRange::samples(path, lo, hi, samples)
            } else {
                let step = (hi - lo) / rng.random_range(1..6) as f64;
                ParameterRange::grid(path, lo, hi, step)
            }
        };
        let hi = rng.random_range(1100.0..2000.0);
        let mut ranges = vec![mk(rng, "vut.mass", 1000.0, hi)];
        if rng.random_bool(0.5) {
            let hi = rng.random_range(7.0..10.0);
            ranges.push(mk(rng, "decision.full_decel", 6.0, hi));
        }
        Some(SweepPlan { base: spec.clone(), ranges, strategy, seed: rng.random() })
    } else {
        None
    };
    (spec, plan)
}

/// Print-parse fixpoint over `n` random documents; returns failures.
pub fn fixpoint(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors = Vec::new();
    for i in 0..n {
        let (spec, plan) = random_document(&mut rng, i);
        let text = render_document(&spec, plan.as_ref());
        match parse_scenario(&text) {
            Ok((s, p)) if s == spec && p == plan => {}
            Ok((s, p)) => errors.push(format!("doc {i}: round trip differs\n{text}\n{s:?}\n{p:?}")),
            Err(e) => errors.push(format!("doc {i}: {e}\n{text}")),
        }
    }
    errors
}
