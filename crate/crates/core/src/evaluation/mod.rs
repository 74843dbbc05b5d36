//! Scoring, matrix and sweep execution, main effects, worst case and the
//! equivalence-class demonstration.

mod baseline;
pub mod report;

pub use baseline::{
    regression_compare, Baseline, BaselineEntry, BaselineMeta, EntryStatus, RegressionEntry, RegressionReport,
    Tolerances, Verdict, BASELINE_SCHEMA_VERSION,
};

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::decision::{classify_situation, SituationClass};
use crate::dynamics::{BrakeConfig, VehicleState};
use crate::engine::{self, RunResult};
use crate::parallel::{derive_seed, map_ordered, Parallelism};
use crate::perception::{ground_truth, SensorConfig};
use crate::scenario::matrix::TestMatrix;
use crate::scenario::sweep::{expand_sweep, Spacing, SweepPlan, SweepPoint, SweepStrategy};
use crate::scenario::{ScenarioKind, ScenarioSpec};
use crate::{Error, Result};

/// Bins used for Monte Carlo marginal means.
pub const MONTE_CARLO_BINS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreOutcome {
    Avoided,
    Mitigated,
    /// Nothing to mitigate: the unmitigated run would not close in.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub spec_id: String,
    pub points: f64,
    pub impact_speed: f64,
    pub speed_reduction: f64,
    pub avoided: bool,
    /// Closing speed the VUT would hit with if nothing intervened (m/s).
    pub reference_speed: f64,
    pub outcome: ScoreOutcome,
}

/// Impact speed of the same scenario without any intervention.
///
/// CCRs and CCRm close at a constant `v - v_t`. In CCRb the closing speed
/// grows at the target's deceleration `d`, so contact after headway `h`
/// happens at `sqrt(2 d h)`, capped at `v` once the target has stopped.
/// Zero when the target is not in the VUT's path.
pub fn reference_closing_speed(spec: &ScenarioSpec) -> f64 {
    if spec.lateral_offset.abs() >= 0.5 * (spec.vut_width + spec.target_width) {
        return 0.0;
    }
    match spec.kind {
        ScenarioKind::Ccrs | ScenarioKind::Ccrm => (spec.vut_speed - spec.target_speed).max(0.0),
        ScenarioKind::Ccrb => {
            let h = match spec.initial_gap {
                crate::scenario::InitialGap::Fixed(h) => h,
                crate::scenario::InitialGap::Auto => return spec.vut_speed,
            };
            (2.0 * spec.target_decel * h).sqrt().min(spec.vut_speed)
        }
    }
}

/// Points: 1 when avoided, otherwise the share of reference closing speed
/// removed before contact. Undefined scores carry 1 point when no contact
/// happened and 0 otherwise.
pub fn score(run: &RunResult, spec: &ScenarioSpec) -> Score {
    let reference = reference_closing_speed(spec);
    let avoided = !run.collided;
    let reduction = (reference - run.impact_speed).max(0.0);
    let (points, outcome) = if reference <= 0.0 {
        (if avoided { 1.0 } else { 0.0 }, ScoreOutcome::Undefined)
    } else if avoided {
        (1.0, ScoreOutcome::Avoided)
    } else {
        ((reduction / reference).clamp(0.0, 1.0), ScoreOutcome::Mitigated)
    };
    Score {
        spec_id: spec.id.clone(),
        points,
        impact_speed: run.impact_speed,
        speed_reduction: reduction,
        avoided,
        reference_speed: reference,
        outcome,
    }
}

/// A finished or failed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Completed { result: RunResult, score: Score },
    Failed { error: String },
}

impl RunOutcome {
    pub fn completed(&self) -> Option<(&RunResult, &Score)> {
        match self {
            RunOutcome::Completed { result, score } => Some((result, score)),
            RunOutcome::Failed { .. } => None,
        }
    }

    pub fn score(&self) -> Option<&Score> {
        self.completed().map(|(_, s)| s)
    }
}

fn execute(spec: &ScenarioSpec, config: &SimConfig, seed: u64) -> RunOutcome {
    match engine::run_summary(spec, config, seed) {
        Ok(result) => {
            let score = score(&result, spec);
            RunOutcome::Completed { result, score }
        }
        Err(e) => RunOutcome::Failed { error: e.to_string() },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub spec: ScenarioSpec,
    pub seed: u64,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub entries: Vec<MatrixEntry>,
}

impl MatrixReport {
    pub fn total_points(&self) -> f64 {
        self.entries.iter().filter_map(|e| e.outcome.score()).map(|s| s.points).sum()
    }

    pub fn failed(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome.completed().is_none()).count()
    }
}

/// Run every matrix entry; entry `i` uses `derive_seed(seed, i)`.
pub fn run_matrix(matrix: &TestMatrix, config: &SimConfig, seed: u64, parallelism: Parallelism) -> MatrixReport {
    let entries = map_ordered(&matrix.entries, parallelism, |i, spec| {
        let s = derive_seed(seed, i as u64);
        MatrixEntry { spec: spec.clone(), seed: s, outcome: execute(spec, config, s) }
    });
    MatrixReport { entries }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub point: SweepPoint,
    pub seed: u64,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub runs: Vec<SweepRun>,
}

/// Expand and execute a plan. Run `i` is seeded with
/// `derive_seed(plan.seed, i)`; aborted runs become failed entries.
pub fn sweep(plan: &SweepPlan, config: &SimConfig, parallelism: Parallelism, run_cap: u64) -> Result<SweepResult> {
    let points = expand_sweep(plan, run_cap)?;
    let runs = map_ordered(&points, parallelism, |_, p| {
        let seed = derive_seed(plan.seed, p.index as u64);
        SweepRun { point: p.clone(), seed, outcome: execute(&p.spec, config, seed) }
    });
    Ok(SweepResult { plan: plan.clone(), runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMean {
    pub level: f64,
    pub mean_points: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEffect {
    pub path: String,
    pub main_effect: f64,
    pub levels: Vec<LevelMean>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    /// In range order.
    pub parameters: Vec<ParameterEffect>,
    /// Paths by main effect, largest first; ties by path name.
    pub ranking: Vec<String>,
}

impl SensitivityReport {
    pub fn effect(&self, path: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.path == path).map(|p| p.main_effect)
    }
}

fn mean_levels(groups: Vec<(f64, Vec<f64>)>) -> Vec<LevelMean> {
    groups
        .into_iter()
        .filter(|(_, pts)| !pts.is_empty())
        .map(|(level, pts)| LevelMean { level, mean_points: pts.iter().sum::<f64>() / pts.len() as f64, n: pts.len() })
        .collect()
}

/// Marginal mean points per level of each swept parameter and their spread.
///
/// Grid plans group runs by exact level; one-at-a-time plans use only the
/// runs that vary that parameter; Monte Carlo plans use equal-width bins
/// (bin centre as level). Failed runs are left out.
pub fn main_effects(result: &SweepResult) -> SensitivityReport {
    let plan = &result.plan;
    let scored: Vec<(&SweepPoint, f64)> =
        result.runs.iter().filter_map(|r| r.outcome.score().map(|s| (&r.point, s.points))).collect();
    let mut parameters = Vec::with_capacity(plan.ranges.len());
    for (ri, range) in plan.ranges.iter().enumerate() {
        let levels = match plan.strategy {
            SweepStrategy::FullGrid | SweepStrategy::OneAtATime => {
                let mut groups: Vec<(f64, Vec<f64>)> = range.levels().into_iter().map(|l| (l, Vec::new())).collect();
                for (p, pts) in &scored {
                    if plan.strategy == SweepStrategy::OneAtATime && p.varied != Some(ri) {
                        continue;
                    }
                    if let Some(g) = groups.iter_mut().find(|g| g.0 == p.values[ri]) {
                        g.1.push(*pts);
                    }
                }
                mean_levels(groups)
            }
            SweepStrategy::MonteCarlo => {
                let width = (range.hi - range.lo) / MONTE_CARLO_BINS as f64;
                let mut groups: Vec<(f64, Vec<f64>)> =
                    (0..MONTE_CARLO_BINS).map(|b| (range.lo + (b as f64 + 0.5) * width, Vec::new())).collect();
                for (p, pts) in &scored {
                    let b = if width > 0.0 { ((p.values[ri] - range.lo) / width).floor() as usize } else { 0 };
                    groups[b.min(MONTE_CARLO_BINS - 1)].1.push(*pts);
                }
                if width == 0.0 {
                    groups.truncate(1);
                }
                mean_levels(groups)
            }
        };
        let max = levels.iter().map(|l| l.mean_points).fold(f64::NEG_INFINITY, f64::max);
        let min = levels.iter().map(|l| l.mean_points).fold(f64::INFINITY, f64::min);
        let main_effect = if levels.len() > 1 { max - min } else { 0.0 };
        parameters.push(ParameterEffect { path: range.path.clone(), main_effect, levels });
    }
    let mut ranking: Vec<(f64, String)> = parameters.iter().map(|p| (p.main_effect, p.path.clone())).collect();
    ranking.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    SensitivityReport { parameters, ranking: ranking.into_iter().map(|(_, p)| p).collect() }
}

/// Completed run with the fewest points; ties go to the higher impact speed,
/// then to the earlier run.
pub fn worst_case(result: &SweepResult) -> Option<(&ScenarioSpec, &Score)> {
    let mut best: Option<(&ScenarioSpec, &Score)> = None;
    for run in &result.runs {
        let Some(s) = run.outcome.score() else { continue };
        let better = match best {
            None => true,
            Some((_, b)) => s.points < b.points || (s.points == b.points && s.impact_speed > b.impact_speed),
        };
        if better {
            best = Some((&run.point.spec, s));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcpRow {
    pub offset: f64,
    pub class: SituationClass,
    pub trigger_ttc: Option<f64>,
    pub impact_speed: f64,
    pub points: f64,
    pub collided: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcpReport {
    pub base_id: String,
    pub vut_speed: f64,
    pub rows: Vec<EcpRow>,
    pub max_impact_difference: f64,
}

/// Configuration the demonstration runs under: ideal sensing and an ideal
/// actuator with no partial braking stage, so the only thing that changes
/// between offsets is the full-brake trigger instant.
pub fn ecp_config(base: &SimConfig) -> SimConfig {
    let mut cfg = *base;
    cfg.sensor = SensorConfig { max_range: base.sensor.max_range, fov_half_angle: base.sensor.fov_half_angle, ..Default::default() };
    cfg.brake = BrakeConfig::ideal();
    cfg.decision.partial_braking = false;
    cfg.decision.forced_trigger_ttc = None;
    cfg
}

/// Run a CCRs scenario at several lateral offsets that all fall in the same
/// in-path equivalence class and report how far apart the outcomes are.
pub fn ecp_demo(base: &ScenarioSpec, offsets: &[f64], config: &SimConfig) -> Result<EcpReport> {
    if base.kind != ScenarioKind::Ccrs {
        return Err(Error::Precondition { msg: format!("ECP demo needs a CCRs scenario, got {}", base.kind) });
    }
    let cfg = ecp_config(config);
    let mut rows = Vec::with_capacity(offsets.len());
    for &offset in offsets {
        let mut spec = base.clone();
        spec.lateral_offset = offset;
        spec.id = format!("{}_off{}", base.id, offset);
        let resolved = spec.resolve_config(&cfg)?;
        let vut = VehicleState::new(0.0, 0.0, spec.vut_speed);
        let tgt = VehicleState::new(1.0, offset, 0.0);
        let class = classify_situation(&ground_truth(&vut, &tgt, spec.target_width), &resolved.decision).class;
        if class != SituationClass::NoEvasion {
            return Err(Error::Precondition {
                msg: format!("offset {offset} m is outside the in-path class (|offset| must be < {})", 0.5 * (spec.vut_width + spec.target_width)),
            });
        }
        let result = engine::run_summary(&spec, &cfg, crate::DEFAULT_SEED)?;
        let s = score(&result, &spec);
        rows.push(EcpRow {
            offset,
            class,
            trigger_ttc: result.trigger_ttc,
            impact_speed: result.impact_speed,
            points: s.points,
            collided: result.collided,
        });
    }
    let max = rows.iter().map(|r| r.impact_speed).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.impact_speed).fold(f64::INFINITY, f64::min);
    let max_impact_difference = if rows.len() > 1 { max - min } else { 0.0 };
    Ok(EcpReport { base_id: base.id.clone(), vut_speed: base.vut_speed, rows, max_impact_difference })
}

/// Summary numbers over a sweep's scored runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointsSummary {
    pub n: usize,
    pub failed: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

pub fn summarize(result: &SweepResult) -> PointsSummary {
    let pts: Vec<f64> = result.runs.iter().filter_map(|r| r.outcome.score()).map(|s| s.points).collect();
    let n = pts.len();
    let (min, max, mean) = if n == 0 {
        (0.0, 0.0, 0.0)
    } else {
        (
            pts.iter().copied().fold(f64::INFINITY, f64::min),
            pts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            pts.iter().sum::<f64>() / n as f64,
        )
    };
    PointsSummary { n, failed: result.runs.len() - n, min, mean, max }
}

/// True when the plan's ranges are all sample-based (Monte Carlo).
pub fn is_monte_carlo(plan: &SweepPlan) -> bool {
    plan.ranges.iter().all(|r| matches!(r.spacing, Spacing::Samples(_)))
}
