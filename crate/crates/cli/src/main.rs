//! `aebsim` command-line front end.
//!
//! Exit codes: 0 success (or regression pass), 1 regression, 2 baseline not
//! comparable, 64 usage error, 66 unreadable or invalid input file,
//! 70 internal failure. Diagnostics go to stderr; data only to `--out`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use aebsim::engine::{self, trace_file_name, write_trace_csv};
use aebsim::evaluation::{
    ecp_demo, main_effects, regression_compare, report, run_matrix, score, sweep, Baseline, MatrixReport,
};
use aebsim::parallel::Parallelism;
use aebsim::scenario::sweep::DEFAULT_RUN_CAP;
use aebsim::scenario::{build_euroncap_matrix, parse_scenario, ProtocolConfig, SweepPlan, TestMatrix};
use aebsim::{Error, ScenarioSpec, SimConfig, DEFAULT_SEED};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

const EX_USAGE: u8 = 64;
const EX_NOINPUT: u8 = 66;
const EX_SOFTWARE: u8 = 70;

#[derive(Parser, Debug)]
#[command(name = "aebsim", version, about = "Closed-loop AEB/FCW simulator and Car-to-Car-Rear test harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Simulation config (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Master seed.
    #[arg(long, env = "AEBSIM_SEED")]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Override the integration step (s).
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct MatrixArgs {
    #[command(flatten)]
    common: Common,
    /// Protocol grid (TOML); the bundled grid is used when omitted.
    #[arg(long)]
    protocol: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write its trace and result.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the protocol test matrix and write a score report.
    Matrix(MatrixArgs),
    /// Execute the sweep declared in a scenario file.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Refuse plans that expand to more runs than this.
        #[arg(long, default_value_t = DEFAULT_RUN_CAP)]
        run_cap: u64,
    },
    /// Execute a sweep and rank its parameters by main effect.
    Sensitivity {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_RUN_CAP)]
        run_cap: u64,
    },
    /// Record a regression baseline over the test matrix.
    Baseline(MatrixArgs),
    /// Compare the test matrix against a stored baseline.
    Regress {
        #[arg(long)]
        baseline: PathBuf,
        #[command(flatten)]
        matrix: MatrixArgs,
    },
    /// Show that one equivalence class can hold very different outcomes.
    DemoEcp {
        /// CCRs base scenario; CCRs at 50 km/h when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Lateral offsets in metres.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 0.75])]
        offsets: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }
}

/// Exit code for errors raised while reading inputs.
fn input_error(e: Error) -> Failure {
    let code = match e {
        Error::RunCap { .. } | Error::Precondition { .. } => EX_USAGE,
        Error::Aborted { .. } => EX_SOFTWARE,
        _ => EX_NOINPUT,
    };
    Failure::new(code, e.to_string())
}

fn run_error(e: Error) -> Failure {
    let code = match e {
        Error::RunCap { .. } | Error::Precondition { .. } => EX_USAGE,
        Error::Io { .. } => EX_NOINPUT,
        _ => EX_SOFTWARE,
    };
    Failure::new(code, e.to_string())
}

fn load_config(common: &Common) -> Result<SimConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => SimConfig::load(p).map_err(input_error)?,
        None => SimConfig::default(),
    };
    if let Some(dt) = common.dt {
        cfg.dt = dt;
        cfg.validate().map_err(|e| Failure::new(EX_USAGE, e.to_string()))?;
    }
    Ok(cfg)
}

fn load_scenario(path: &Path) -> Result<(ScenarioSpec, Option<SweepPlan>), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EX_NOINPUT, format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| Failure::new(EX_NOINPUT, format!("{}: {e}", path.display())))
}

fn load_protocol(path: Option<&Path>) -> Result<(TestMatrix, String), Failure> {
    let cfg = match path {
        Some(p) => ProtocolConfig::load(p).map_err(input_error)?,
        None => ProtocolConfig::from_toml_str(aebsim::scenario::matrix::DEFAULT_PROTOCOL).map_err(input_error)?,
    };
    let matrix = build_euroncap_matrix(&cfg).map_err(input_error)?;
    Ok((matrix, cfg.to_toml_string()))
}

struct OutDir(PathBuf);

impl OutDir {
    fn create(path: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(path).map_err(|e| Failure::new(EX_NOINPUT, format!("{}: {e}", path.display())))?;
        Ok(Self(path.to_path_buf()))
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<(), Failure> {
        let p = self.0.join(name);
        fs::write(&p, contents).map_err(|e| Failure::new(EX_NOINPUT, format!("{}: {e}", p.display())))
    }
}

fn pretty(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json serialises");
    s.push('\n');
    s.into_bytes()
}

fn cmd_run(scenario: &Path, common: &Common) -> Result<u8, Failure> {
    let (spec, _) = load_scenario(scenario)?;
    let cfg = load_config(common)?;
    let seed = common.seed.unwrap_or(DEFAULT_SEED);
    let (result, trace) = engine::run(&spec, &cfg, seed).map_err(run_error)?;
    let out = OutDir::create(&common.out)?;
    let mut csv = Vec::new();
    write_trace_csv(&trace, &mut csv).map_err(|e| Failure::new(EX_SOFTWARE, e.to_string()))?;
    out.write(&trace_file_name(&spec.id, seed), &csv)?;
    let s = score(&result, &spec);
    let summary = json!({
        "schema_version": report::REPORT_SCHEMA_VERSION,
        "result": result,
        "score": s,
        "events": trace.events,
    });
    out.write(&format!("{}.result.json", spec.id), &pretty(&summary))?;
    Ok(0)
}

fn matrix_hash(cfg: &SimConfig, protocol_toml: &str, seed: u64) -> String {
    cfg.environment_hash(&format!("seed = {seed}\n{protocol_toml}"))
}

fn run_protocol(args: &MatrixArgs) -> Result<(MatrixReport, SimConfig, String, u64), Failure> {
    let (matrix, protocol) = load_protocol(args.protocol.as_deref())?;
    let cfg = load_config(&args.common)?;
    let seed = args.common.seed.unwrap_or(DEFAULT_SEED);
    let report = run_matrix(&matrix, &cfg, seed, Parallelism::from_jobs(args.common.jobs));
    Ok((report, cfg, protocol, seed))
}

fn warn_failed(report: &MatrixReport) {
    for e in &report.entries {
        if let aebsim::evaluation::RunOutcome::Failed { error } = &e.outcome {
            eprintln!("aebsim: case {} failed: {error}", e.spec.id);
        }
    }
}

fn cmd_matrix(args: &MatrixArgs) -> Result<u8, Failure> {
    let (rep, _, _, _) = run_protocol(args)?;
    warn_failed(&rep);
    let out = OutDir::create(&args.common.out)?;
    out.write("matrix.csv", report::matrix_csv(&rep).as_bytes())?;
    out.write("matrix.json", report::matrix_json(&rep).as_bytes())?;
    Ok(0)
}

fn sweep_plan(scenario: &Path, common: &Common) -> Result<SweepPlan, Failure> {
    let (_, plan) = load_scenario(scenario)?;
    let mut plan =
        plan.ok_or_else(|| Failure::new(EX_USAGE, format!("{}: no sweep block in scenario", scenario.display())))?;
    if let Some(seed) = common.seed {
        plan.seed = seed;
    }
    Ok(plan)
}

fn cmd_sweep(scenario: &Path, common: &Common, run_cap: u64, sensitivity: bool) -> Result<u8, Failure> {
    let plan = sweep_plan(scenario, common)?;
    let cfg = load_config(common)?;
    let result = sweep(&plan, &cfg, Parallelism::from_jobs(common.jobs), run_cap).map_err(run_error)?;
    let out = OutDir::create(&common.out)?;
    out.write("sweep.csv", report::sweep_csv(&result).as_bytes())?;
    out.write("sweep_summary.json", report::sweep_summary_json(&result).as_bytes())?;
    if sensitivity {
        let effects = main_effects(&result);
        out.write("sensitivity.csv", report::sensitivity_csv(&effects).as_bytes())?;
        out.write("sensitivity.json", report::sensitivity_json(&effects).as_bytes())?;
    }
    Ok(0)
}

fn cmd_baseline(args: &MatrixArgs) -> Result<u8, Failure> {
    let (rep, cfg, protocol, seed) = run_protocol(args)?;
    warn_failed(&rep);
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let baseline = Baseline::from_report(&rep, matrix_hash(&cfg, &protocol, seed), cfg.dt, created);
    let out = OutDir::create(&args.common.out)?;
    out.write("baseline.json", baseline.to_json().as_bytes())?;
    Ok(0)
}

fn cmd_regress(baseline: &Path, args: &MatrixArgs) -> Result<u8, Failure> {
    let stored = Baseline::load(baseline).map_err(input_error)?;
    let (rep, cfg, protocol, seed) = run_protocol(args)?;
    warn_failed(&rep);
    let verdict = regression_compare(&rep, &matrix_hash(&cfg, &protocol, seed), &stored);
    let out = OutDir::create(&args.common.out)?;
    out.write("regression.json", &pretty(&serde_json::to_value(&verdict).expect("report serialises")))?;
    eprintln!("aebsim: {}", verdict.message);
    for e in verdict.failures() {
        eprintln!("aebsim: {} {:?}", e.spec_id, e.status);
    }
    Ok(verdict.verdict.exit_code() as u8)
}

fn cmd_demo_ecp(scenario: Option<&Path>, offsets: &[f64], common: &Common) -> Result<u8, Failure> {
    let base = match scenario {
        Some(p) => load_scenario(p)?.0,
        None => ScenarioSpec::ccrs("ccrs50", 50.0 / 3.6),
    };
    if offsets.is_empty() {
        return Err(Failure::new(EX_USAGE, "at least one offset is required"));
    }
    let cfg = load_config(common)?;
    let rep = ecp_demo(&base, offsets, &cfg).map_err(run_error)?;
    let out = OutDir::create(&common.out)?;
    out.write("ecp_demo.json", report::ecp_json(&rep).as_bytes())?;
    out.write("ecp_demo.csv", report::ecp_csv(&rep).as_bytes())?;
    Ok(0)
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Run { scenario, common } => cmd_run(scenario, common),
        Command::Matrix(args) => cmd_matrix(args),
        Command::Sweep { scenario, common, run_cap } => cmd_sweep(scenario, common, *run_cap, false),
        Command::Sensitivity { scenario, common, run_cap } => cmd_sweep(scenario, common, *run_cap, true),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Regress { baseline, matrix } => cmd_regress(baseline, matrix),
        Command::DemoEcp { scenario, offsets, common } => cmd_demo_ecp(scenario.as_deref(), offsets, common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EX_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("aebsim: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
