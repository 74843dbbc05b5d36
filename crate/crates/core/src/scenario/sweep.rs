//! Tolerance sweeps: parameter ranges, sampling strategies and expansion
//! into concrete run lists.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Param, ScenarioSpec};
use crate::{Error, Result};

/// Default ceiling on the number of runs one plan may expand to.
pub const DEFAULT_RUN_CAP: u64 = 1_000_000;

// Absorbs rounding in (hi - lo) / step so 0.25-steps over [-0.5, 0.5] give 5 levels.
const LEVEL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Step(f64),
    Samples(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRange {
    pub path: String,
    pub lo: f64,
    pub hi: f64,
    pub spacing: Spacing,
}

impl ParameterRange {
    pub fn grid(path: impl Into<String>, lo: f64, hi: f64, step: f64) -> Self {
        Self { path: path.into(), lo, hi, spacing: Spacing::Step(step) }
    }

    pub fn samples(path: impl Into<String>, lo: f64, hi: f64, n: u32) -> Self {
        Self { path: path.into(), lo, hi, spacing: Spacing::Samples(n) }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let param = Param::lookup(&self.path).ok_or_else(|| format!("unknown parameter path `{}`", self.path))?;
        if !param.dim.is_numeric() {
            return Err(format!("`{}` is not a numeric parameter", self.path));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(format!("range `{}` needs finite lo <= hi", self.path));
        }
        match self.spacing {
            Spacing::Step(s) if !(s > 0.0 && s.is_finite()) => Err(format!("range `{}` needs step > 0", self.path)),
            Spacing::Samples(0) => Err(format!("range `{}` needs at least one sample", self.path)),
            _ => Ok(()),
        }
    }

    /// Number of grid levels, `None` for sampled ranges.
    pub fn level_count(&self) -> Option<u64> {
        match self.spacing {
            Spacing::Step(s) => Some(((self.hi - self.lo) / s + LEVEL_EPS).floor() as u64 + 1),
            Spacing::Samples(_) => None,
        }
    }

    pub fn levels(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Step(s) => (0..self.level_count().unwrap_or(0)).map(|i| self.lo + i as f64 * s).collect(),
            Spacing::Samples(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStrategy {
    FullGrid,
    MonteCarlo,
    OneAtATime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub base: ScenarioSpec,
    pub ranges: Vec<ParameterRange>,
    pub strategy: SweepStrategy,
    pub seed: u64,
}

/// One expanded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub spec: ScenarioSpec,
    /// Value of each range's parameter, in range order.
    pub values: Vec<f64>,
    /// One-at-a-time only: which range this run varies (`None` for the base run).
    pub varied: Option<usize>,
}

impl SweepPlan {
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (i, r) in self.ranges.iter().enumerate() {
            r.validate()?;
            if self.ranges[..i].iter().any(|o| o.path == r.path) {
                return Err(format!("duplicate sweep path `{}`", r.path));
            }
            let ok = match self.strategy {
                SweepStrategy::MonteCarlo => matches!(r.spacing, Spacing::Samples(_)),
                SweepStrategy::FullGrid | SweepStrategy::OneAtATime => matches!(r.spacing, Spacing::Step(_)),
            };
            if !ok {
                return Err(format!("range `{}` does not match the {:?} strategy", r.path, self.strategy));
            }
        }
        if self.strategy == SweepStrategy::MonteCarlo {
            let counts: Vec<u32> = self
                .ranges
                .iter()
                .filter_map(|r| match r.spacing {
                    Spacing::Samples(n) => Some(n),
                    Spacing::Step(_) => None,
                })
                .collect();
            if counts.windows(2).any(|w| w[0] != w[1]) {
                return Err("Monte Carlo ranges must share one sample count".into());
            }
        }
        Ok(())
    }

    /// Number of runs the plan expands to, computed without expanding.
    pub fn run_count(&self) -> u128 {
        let levels = || self.ranges.iter().map(|r| r.level_count().unwrap_or(0) as u128);
        match self.strategy {
            SweepStrategy::FullGrid => levels().fold(1u128, |acc, n| acc.saturating_mul(n)),
            SweepStrategy::OneAtATime => 1 + levels().sum::<u128>(),
            SweepStrategy::MonteCarlo => match self.ranges.first().map(|r| r.spacing) {
                Some(Spacing::Samples(n)) => n as u128,
                _ => 1,
            },
        }
    }
}

fn emit(plan: &SweepPlan, index: usize, values: &[(usize, f64)], varied: Option<usize>) -> Result<SweepPoint> {
    let mut spec = plan.base.clone();
    spec.id = format!("{}_r{index}", plan.base.id);
    for &(r, v) in values {
        spec.set_param(&plan.ranges[r].path, v).map_err(|m| Error::Scenario { id: spec.id.clone(), msg: m })?;
    }
    spec.check()?;
    let all = plan
        .ranges
        .iter()
        .enumerate()
        .map(|(r, range)| {
            values
                .iter()
                .find(|(i, _)| *i == r)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| base_value(&plan.base, &range.path))
        })
        .collect();
    Ok(SweepPoint { index, spec, values: all, varied })
}

fn base_value(spec: &ScenarioSpec, path: &str) -> f64 {
    spec.get_param(path, &crate::SimConfig::default()).unwrap_or(f64::NAN)
}

/// Expand a plan into concrete scenarios.
///
/// * `FullGrid`: Cartesian product, first range outermost.
/// * `OneAtATime`: the base spec, then for each range in order each of its
///   levels with everything else at base.
/// * `MonteCarlo`: for each run, one uniform draw per range in range order
///   from a ChaCha8 stream seeded with `plan.seed`.
pub fn expand_sweep(plan: &SweepPlan, run_cap: u64) -> Result<Vec<SweepPoint>> {
    plan.validate().map_err(|msg| Error::Scenario { id: plan.base.id.clone(), msg })?;
    plan.base.check()?;
    let count = plan.run_count();
    if count > run_cap as u128 {
        return Err(Error::RunCap { count, cap: run_cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    match plan.strategy {
        SweepStrategy::FullGrid => {
            let levels: Vec<Vec<f64>> = plan.ranges.iter().map(ParameterRange::levels).collect();
            let mut idx = vec![0usize; levels.len()];
            if levels.iter().any(Vec::is_empty) {
                return Ok(out);
            }
            loop {
                let values: Vec<(usize, f64)> = idx.iter().enumerate().map(|(r, &i)| (r, levels[r][i])).collect();
                out.push(emit(plan, out.len(), &values, None)?);
                // odometer increment, last range fastest
                let mut r = levels.len();
                loop {
                    if r == 0 {
                        return Ok(out);
                    }
                    r -= 1;
                    idx[r] += 1;
                    if idx[r] < levels[r].len() {
                        break;
                    }
                    idx[r] = 0;
                }
            }
        }
        SweepStrategy::OneAtATime => {
            out.push(emit(plan, 0, &[], None)?);
            for (r, range) in plan.ranges.iter().enumerate() {
                for level in range.levels() {
                    out.push(emit(plan, out.len(), &[(r, level)], Some(r))?);
                }
            }
        }
        SweepStrategy::MonteCarlo => {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            for i in 0..count as usize {
                let values: Vec<(usize, f64)> = plan
                    .ranges
                    .iter()
                    .enumerate()
                    .map(|(r, range)| (r, rng.random_range(range.lo..=range.hi)))
                    .collect();
                out.push(emit(plan, i, &values, None)?);
            }
        }
    }
    Ok(out)
}
