use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).to_str().unwrap().to_string()
}

fn aebsim(cwd: &Path, args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aebsim"));
    cmd.current_dir(cwd).args(args).env_remove("AEBSIM_SEED");
    if let Some(s) = seed_env {
        cmd.env("AEBSIM_SEED", s);
    }
    cmd.output().unwrap()
}

fn listing(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = walk(dir).into_iter().map(|p| p.strip_prefix(dir).unwrap().to_path_buf()).collect();
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut v = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            v.extend(walk(&p));
        }
        v.push(p);
    }
    v
}

#[test]
fn run_writes_trace_and_result_under_out() {
    let tmp = tempfile::tempdir().unwrap();
    let o = aebsim(tmp.path(), &["run", "--scenario", &fixture("ccrs50.dsl"), "--out", "out"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        listing(tmp.path()),
        [PathBuf::from("out"), PathBuf::from("out/ccrs50.result.json"), PathBuf::from("out/ccrs50_42.csv")]
    );
    let csv = fs::read_to_string(tmp.path().join("out/ccrs50_42.csv")).unwrap();
    assert!(csv.starts_with("t,x_vut,v_vut,a_vut,x_tgt,v_tgt,a_tgt,gap,ttc,warning_level,decel_request,decel_achieved\n"));
    assert!(!csv.ends_with('\n'));
    let result: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("out/ccrs50.result.json")).unwrap()).unwrap();
    assert_eq!(result["result"]["seed"], 42);
    assert!(o.stdout.is_empty());
}

#[test]
fn seed_from_environment_and_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let s = fixture("ccrs50.dsl");
    aebsim(tmp.path(), &["run", "--scenario", &s, "--out", "a"], Some("7"));
    assert!(tmp.path().join("a/ccrs50_7.csv").exists());
    aebsim(tmp.path(), &["run", "--scenario", &s, "--out", "b", "--seed", "9"], Some("7"));
    assert!(tmp.path().join("b/ccrs50_9.csv").exists());
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["x", "y"] {
        let o = aebsim(tmp.path(), &["matrix", "--out", out], None);
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["matrix.csv", "matrix.json"] {
        assert_eq!(fs::read(tmp.path().join("x").join(name)).unwrap(), fs::read(tmp.path().join("y").join(name)).unwrap());
    }
}

#[test]
fn sensitivity_writes_all_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let o = aebsim(tmp.path(), &["sensitivity", "--scenario", &fixture("oat_offset_speed.dsl"), "--out", "s"], None);
    assert_eq!(o.status.code(), Some(0));
    for name in ["sweep.csv", "sweep_summary.json", "sensitivity.csv", "sensitivity.json"] {
        assert!(tmp.path().join("s").join(name).exists(), "{name}");
    }
    let csv = fs::read_to_string(tmp.path().join("s/sensitivity.csv")).unwrap();
    assert!(csv.starts_with("parameter,level,mean_points,n\n"));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("s/sensitivity.json")).unwrap()).unwrap();
    assert_eq!(json["ranking"][0], "target.lateral_offset");
}

#[test]
fn regress_refuses_a_different_environment() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(aebsim(tmp.path(), &["baseline", "--out", "b"], None).status.code(), Some(0));
    let o = aebsim(tmp.path(), &["regress", "--baseline", "b/baseline.json", "--out", "r", "--dt", "0.0005"], None);
    assert_eq!(o.status.code(), Some(2));
    let r: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("r/regression.json")).unwrap()).unwrap();
    assert_eq!(r["verdict"], "incomparable");
}

#[test]
fn demo_ecp_reports_both_offsets() {
    let tmp = tempfile::tempdir().unwrap();
    let o = aebsim(tmp.path(), &["demo-ecp", "--offsets", "0,0.75", "--out", "e"], None);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("e/ecp_demo.json")).unwrap()).unwrap();
    assert_eq!(r["rows"].as_array().unwrap().len(), 2);
    assert!(r["max_impact_difference"].as_f64().unwrap() >= 5.0);
    let o = aebsim(tmp.path(), &["demo-ecp", "--offsets", "-2.0", "--out", "e2"], None);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| aebsim(tmp.path(), args, None).status.code();
    assert_eq!(code(&[]), Some(64));
    assert_eq!(code(&["run", "--out", "o"]), Some(64));
    assert_eq!(code(&["run", "--scenario", "missing.dsl", "--out", "o"]), Some(66));
    assert_eq!(code(&["matrix", "--config", "missing.toml", "--out", "o"]), Some(66));
    assert_eq!(code(&["sweep", "--scenario", &fixture("ccrs50.dsl"), "--out", "o"]), Some(64));
    assert_eq!(code(&["run", "--scenario", &fixture("ccrs50.dsl"), "--out", "o", "--dt", "-1"]), Some(64));
    let o = aebsim(tmp.path(), &["sweep", "--scenario", &fixture("mc_offsets.dsl"), "--out", "o", "--run-cap", "10"], None);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1000"));
}
