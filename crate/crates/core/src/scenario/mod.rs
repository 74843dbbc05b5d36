//! Scenario definitions: the test-case record, the parameter catalogue used
//! by the DSL and by sweeps, the protocol test matrix and sweep expansion.

pub mod dsl;
pub mod matrix;
pub mod sweep;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::perception::SensorMode;
use crate::{Error, Result};

pub use dsl::{parse_scenario, render_document, render_scenario};
pub use matrix::{build_euroncap_matrix, ProtocolConfig, TestMatrix};
pub use sweep::{expand_sweep, ParameterRange, Spacing, SweepPlan, SweepPoint, SweepStrategy};

/// Upper bound on any speed accepted at the boundary (300 km/h).
pub const MAX_SPEED: f64 = 300.0 / 3.6;
pub const MAX_FRICTION: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Stationary target.
    Ccrs,
    /// Target moving at constant speed.
    Ccrm,
    /// Target braking from the VUT's speed.
    Ccrb,
}

impl ScenarioKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ScenarioKind::Ccrs => "ccrs",
            ScenarioKind::Ccrm => "ccrm",
            ScenarioKind::Ccrb => "ccrb",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "ccrs" => Some(ScenarioKind::Ccrs),
            "ccrm" => Some(ScenarioKind::Ccrm),
            "ccrb" => Some(ScenarioKind::Ccrb),
            _ => None,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialGap {
    /// Sensor range plus a fixed margin, resolved against the run config.
    Auto,
    Fixed(f64),
}

impl InitialGap {
    pub fn resolve(self, config: &SimConfig) -> f64 {
        match self {
            InitialGap::Auto => config.auto_gap(),
            InitialGap::Fixed(g) => g,
        }
    }
}

/// Value of a per-scenario configuration override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OverrideValue {
    Number(f64),
    Flag(bool),
    Mode(SensorMode),
    /// Explicitly unset optional parameter (e.g. no forced trigger).
    Unset,
}

/// One fully parameterised test case. All quantities are SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub kind: ScenarioKind,
    pub vut_speed: f64,
    pub target_speed: f64,
    /// Commanded target deceleration magnitude (CCRb only).
    pub target_decel: f64,
    /// Longitudinal clearance at t = 0; the headway for CCRb.
    pub initial_gap: InitialGap,
    /// Target centre relative to the VUT path, left positive.
    pub lateral_offset: f64,
    pub vut_mass: f64,
    pub road_friction: f64,
    pub vut_width: f64,
    pub target_width: f64,
    /// Sensor, decision and brake overrides keyed by dotted path.
    pub overrides: BTreeMap<String, OverrideValue>,
}

impl ScenarioSpec {
    pub const DEFAULT_MASS: f64 = 1500.0;
    pub const DEFAULT_WIDTH: f64 = 1.8;

    /// A CCRs/CCRm/CCRb case with default vehicle data and an auto gap.
    pub fn new(id: impl Into<String>, kind: ScenarioKind, vut_speed: f64, target_speed: f64) -> Self {
        Self {
            id: id.into(),
            kind,
            vut_speed,
            target_speed,
            target_decel: 0.0,
            initial_gap: InitialGap::Auto,
            lateral_offset: 0.0,
            vut_mass: Self::DEFAULT_MASS,
            road_friction: 1.0,
            vut_width: Self::DEFAULT_WIDTH,
            target_width: Self::DEFAULT_WIDTH,
            overrides: BTreeMap::new(),
        }
    }

    pub fn ccrs(id: impl Into<String>, vut_speed: f64) -> Self {
        Self::new(id, ScenarioKind::Ccrs, vut_speed, 0.0)
    }

    pub fn ccrb(id: impl Into<String>, speed: f64, headway: f64, decel: f64) -> Self {
        Self {
            target_decel: decel,
            initial_gap: InitialGap::Fixed(headway),
            ..Self::new(id, ScenarioKind::Ccrb, speed, speed)
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let finite = [
            self.vut_speed,
            self.target_speed,
            self.target_decel,
            self.lateral_offset,
            self.vut_mass,
            self.road_friction,
            self.vut_width,
            self.target_width,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err("all scenario quantities must be finite".into());
        }
        if self.vut_speed < 0.0 || self.target_speed < 0.0 {
            return Err("speeds must be >= 0".into());
        }
        if self.vut_speed > MAX_SPEED || self.target_speed > MAX_SPEED {
            return Err("speeds must not exceed 300 km/h".into());
        }
        if self.target_decel < 0.0 {
            return Err("target deceleration is a magnitude and must be >= 0".into());
        }
        match self.kind {
            ScenarioKind::Ccrs => {
                if self.target_speed != 0.0 || self.target_decel != 0.0 {
                    return Err("CCRs requires stationary target".into());
                }
            }
            ScenarioKind::Ccrm => {
                if !(self.target_speed > 0.0) {
                    return Err("CCRm requires a moving target".into());
                }
                if self.target_decel != 0.0 {
                    return Err("CCRm requires a constant-speed target".into());
                }
            }
            ScenarioKind::Ccrb => {
                if self.vut_speed != self.target_speed {
                    return Err("CCRb requires equal VUT and target speed".into());
                }
                if !(self.target_decel > 0.0) {
                    return Err("CCRb requires target deceleration > 0".into());
                }
                if !matches!(self.initial_gap, InitialGap::Fixed(_)) {
                    return Err("CCRb requires headway > 0".into());
                }
            }
        }
        if let InitialGap::Fixed(g) = self.initial_gap {
            if !(g > 0.0 && g.is_finite()) {
                return Err(match self.kind {
                    ScenarioKind::Ccrb => "CCRb requires headway > 0".into(),
                    _ => format!("initial gap must be > 0, got {g}"),
                });
            }
        }
        if !(self.vut_mass > 0.0) {
            return Err("VUT mass must be > 0".into());
        }
        if !(self.vut_width > 0.0 && self.target_width > 0.0) {
            return Err("vehicle widths must be > 0".into());
        }
        if !(self.road_friction > 0.0 && self.road_friction <= MAX_FRICTION) {
            return Err(format!("road friction must be in (0, {MAX_FRICTION}], got {}", self.road_friction));
        }
        for (path, value) in &self.overrides {
            check_override(path, value)?;
        }
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        self.validate().map_err(|msg| Error::Scenario { id: self.id.clone(), msg })
    }

    /// Base config with this scenario's overrides and vehicle data applied.
    pub fn resolve_config(&self, base: &SimConfig) -> Result<SimConfig> {
        let mut cfg = *base;
        for (path, value) in &self.overrides {
            apply_override(&mut cfg, path, value).map_err(|msg| Error::Scenario { id: self.id.clone(), msg })?;
        }
        cfg.decision.vut_width = self.vut_width;
        cfg.validate().map_err(|e| Error::Scenario { id: self.id.clone(), msg: e.to_string() })?;
        Ok(cfg)
    }

    /// Numeric value at a sweepable path, as used by sensitivity analysis.
    pub fn get_param(&self, path: &str, config: &SimConfig) -> Option<f64> {
        let p = Param::lookup(path)?;
        if !p.dim.is_numeric() {
            return None;
        }
        Some(match path {
            "vut.speed" => self.vut_speed,
            "vut.mass" => self.vut_mass,
            "vut.width" => self.vut_width,
            "target.speed" => self.target_speed,
            "target.decel" => self.target_decel,
            "target.lateral_offset" => self.lateral_offset,
            "target.width" => self.target_width,
            "target.headway" | "initial_gap" => self.initial_gap.resolve(config),
            "road.friction" => self.road_friction,
            _ => match self.overrides.get(path) {
                Some(OverrideValue::Number(v)) => *v,
                _ => config_number(config, path)?,
            },
        })
    }

    /// Assign a numeric parameter; unknown or non-numeric paths are rejected.
    pub fn set_param(&mut self, path: &str, value: f64) -> std::result::Result<(), String> {
        let p = Param::lookup(path).ok_or_else(|| format!("unknown parameter path `{path}`"))?;
        if !p.dim.is_numeric() {
            return Err(format!("parameter `{path}` is not numeric"));
        }
        match path {
            "vut.speed" => self.vut_speed = value,
            "vut.mass" => self.vut_mass = value,
            "vut.width" => self.vut_width = value,
            "target.speed" => self.target_speed = value,
            "target.decel" => self.target_decel = value,
            "target.lateral_offset" => self.lateral_offset = value,
            "target.width" => self.target_width = value,
            "target.headway" | "initial_gap" => self.initial_gap = InitialGap::Fixed(value),
            "road.friction" => self.road_friction = value,
            _ => {
                self.overrides.insert(path.to_string(), OverrideValue::Number(value));
            }
        }
        Ok(())
    }
}

/// Physical dimension of a parameter, which fixes the accepted units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Speed,
    Length,
    Time,
    Mass,
    Accel,
    Jerk,
    Force,
    Ratio,
    Angle,
    Flag,
    Mode,
}

impl Dim {
    pub fn is_numeric(self) -> bool {
        !matches!(self, Dim::Flag | Dim::Mode)
    }

    /// Unit the DSL printer uses; chosen so the SI value prints unchanged.
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dim::Speed => "mps",
            Dim::Length => "m",
            Dim::Time => "s",
            Dim::Mass => "kg",
            Dim::Accel => "ms2",
            Dim::Jerk => "ms3",
            Dim::Force => "N",
            Dim::Ratio => "ratio",
            Dim::Angle => "rad",
            Dim::Flag | Dim::Mode => "",
        }
    }
}

/// Conversion from a literal's unit to SI.
pub type ToSi = fn(f64) -> f64;

/// Units accepted on numeric literals and their conversion to SI.
pub fn unit_info(unit: &str) -> Option<(Dim, ToSi)> {
    fn id(v: f64) -> f64 {
        v
    }
    fn kmh(v: f64) -> f64 {
        v / 3.6
    }
    fn deg(v: f64) -> f64 {
        v.to_radians()
    }
    Some(match unit {
        "kmh" => (Dim::Speed, kmh),
        "mps" => (Dim::Speed, id),
        "m" => (Dim::Length, id),
        "s" => (Dim::Time, id),
        "kg" => (Dim::Mass, id),
        "ms2" => (Dim::Accel, id),
        "ms3" => (Dim::Jerk, id),
        "N" => (Dim::Force, id),
        "ratio" => (Dim::Ratio, id),
        "deg" => (Dim::Angle, deg),
        "rad" => (Dim::Angle, id),
        _ => return None,
    })
}

/// Catalogue entry for one addressable parameter.
#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub path: &'static str,
    pub dim: Dim,
    /// Accepts the `"unlimited"` literal (stored as +inf).
    pub unlimited: bool,
    /// Accepts the `"none"` literal (stored as [`OverrideValue::Unset`]).
    pub optional: bool,
}

const fn p(path: &'static str, dim: Dim) -> Param {
    Param { path, dim, unlimited: false, optional: false }
}

pub const PARAMS: &[Param] = &[
    p("vut.speed", Dim::Speed),
    p("vut.mass", Dim::Mass),
    p("vut.width", Dim::Length),
    p("target.speed", Dim::Speed),
    p("target.decel", Dim::Accel),
    p("target.lateral_offset", Dim::Length),
    p("target.width", Dim::Length),
    p("target.headway", Dim::Length),
    p("initial_gap", Dim::Length),
    p("road.friction", Dim::Ratio),
    p("sensor.mode", Dim::Mode),
    p("sensor.max_range", Dim::Length),
    p("sensor.fov_half_angle", Dim::Angle),
    p("sensor.range_noise_sigma", Dim::Length),
    p("sensor.rate_noise_sigma", Dim::Speed),
    p("sensor.dropout_prob", Dim::Ratio),
    p("sensor.latency", Dim::Time),
    p("decision.enabled", Dim::Flag),
    p("decision.ttc_warn", Dim::Time),
    p("decision.ttc_partial", Dim::Time),
    p("decision.partial_decel", Dim::Accel),
    p("decision.full_decel", Dim::Accel),
    p("decision.lateral_accel_limit", Dim::Accel),
    p("decision.latch_full_brake", Dim::Flag),
    p("decision.partial_braking", Dim::Flag),
    Param { path: "decision.forced_trigger_ttc", dim: Dim::Time, unlimited: false, optional: true },
    p("brake.delay", Dim::Time),
    Param { path: "brake.jerk_limit", dim: Dim::Jerk, unlimited: true, optional: false },
    Param { path: "brake.max_force", dim: Dim::Force, unlimited: true, optional: false },
];

impl Param {
    pub fn lookup(path: &str) -> Option<&'static Param> {
        PARAMS.iter().find(|p| p.path == path)
    }

    pub fn is_override(&self) -> bool {
        ["sensor.", "decision.", "brake."].iter().any(|pre| self.path.starts_with(pre))
    }
}

fn check_override(path: &str, value: &OverrideValue) -> std::result::Result<(), String> {
    let p = Param::lookup(path)
        .filter(|p| p.is_override())
        .ok_or_else(|| format!("unknown override `{path}`"))?;
    match (p.dim, value) {
        (Dim::Flag, OverrideValue::Flag(_)) | (Dim::Mode, OverrideValue::Mode(_)) => Ok(()),
        (_, OverrideValue::Unset) if p.optional => Ok(()),
        (d, OverrideValue::Number(v)) if d.is_numeric() => {
            if v.is_nan() || *v < 0.0 || (v.is_infinite() && !p.unlimited) {
                Err(format!("override `{path}` must be a finite value >= 0, got {v}"))
            } else {
                Ok(())
            }
        }
        _ => Err(format!("override `{path}` has the wrong kind of value")),
    }
}

fn apply_override(cfg: &mut SimConfig, path: &str, value: &OverrideValue) -> std::result::Result<(), String> {
    check_override(path, value)?;
    use OverrideValue::*;
    match (path, value) {
        ("sensor.mode", Mode(m)) => cfg.sensor.mode = *m,
        ("decision.enabled", Flag(b)) => cfg.decision.enabled = *b,
        ("decision.latch_full_brake", Flag(b)) => cfg.decision.latch_full_brake = *b,
        ("decision.partial_braking", Flag(b)) => cfg.decision.partial_braking = *b,
        ("decision.forced_trigger_ttc", Unset) => cfg.decision.forced_trigger_ttc = None,
        ("decision.forced_trigger_ttc", Number(v)) => cfg.decision.forced_trigger_ttc = Some(*v),
        (_, Number(v)) => *config_slot(cfg, path).ok_or_else(|| format!("unknown override `{path}`"))? = *v,
        _ => return Err(format!("override `{path}` has the wrong kind of value")),
    }
    Ok(())
}

fn config_slot<'a>(cfg: &'a mut SimConfig, path: &str) -> Option<&'a mut f64> {
    Some(match path {
        "sensor.max_range" => &mut cfg.sensor.max_range,
        "sensor.fov_half_angle" => &mut cfg.sensor.fov_half_angle,
        "sensor.range_noise_sigma" => &mut cfg.sensor.range_noise_sigma,
        "sensor.rate_noise_sigma" => &mut cfg.sensor.rate_noise_sigma,
        "sensor.dropout_prob" => &mut cfg.sensor.dropout_prob,
        "sensor.latency" => &mut cfg.sensor.latency,
        "decision.ttc_warn" => &mut cfg.decision.ttc_warn,
        "decision.ttc_partial" => &mut cfg.decision.ttc_partial,
        "decision.partial_decel" => &mut cfg.decision.partial_decel,
        "decision.full_decel" => &mut cfg.decision.full_decel,
        "decision.lateral_accel_limit" => &mut cfg.decision.lateral_accel_limit,
        "brake.delay" => &mut cfg.brake.delay,
        "brake.jerk_limit" => &mut cfg.brake.jerk_limit,
        "brake.max_force" => &mut cfg.brake.max_force,
        _ => return None,
    })
}

fn config_number(cfg: &SimConfig, path: &str) -> Option<f64> {
    if path == "decision.forced_trigger_ttc" {
        return cfg.decision.forced_trigger_ttc;
    }
    let mut copy = *cfg;
    config_slot(&mut copy, path).map(|v| *v)
}
