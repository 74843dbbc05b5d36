//! Reference FCW/AEB policy.
//!
//! The four-step grade is derived from time-to-collision. Autonomous full
//! braking fires at the last point where neither braking nor a swerve by the
//! driver could still avoid the target, so the trigger moves with the
//! lateral overlap between the two vehicles.

use serde::{Deserialize, Serialize};

use crate::perception::{Kinematics, SensorTrack};

/// Below this closing acceleration TTC uses the constant-speed formula.
pub const ACCEL_EPS: f64 = 1e-6;

/// How long the full-brake latch survives a lost track (s).
pub const LATCH_TRACK_LOSS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WarningLevel {
    None = 0,
    Warn = 1,
    PartialBrake = 2,
    FullBrake = 3,
}

impl WarningLevel {
    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionConfig {
    /// When false the algorithm never warns or brakes.
    pub enabled: bool,
    pub ttc_warn: f64,
    pub ttc_partial: f64,
    pub partial_decel: f64,
    pub full_decel: f64,
    /// Lateral acceleration a driver is assumed to manage in a swerve (m/s²).
    pub lateral_accel_limit: f64,
    pub vut_width: f64,
    pub latch_full_brake: bool,
    /// When false, L2 is still graded but requests no deceleration.
    pub partial_braking: bool,
    /// Replaces the last-point rule: full braking once TTC drops to this value.
    /// L2 is skipped in this mode.
    pub forced_trigger_ttc: Option<f64>,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            ttc_warn: 2.6,
            ttc_partial: 1.6,
            partial_decel: 4.0,
            full_decel: 9.0,
            lateral_accel_limit: 5.0,
            vut_width: 1.8,
            latch_full_brake: true,
            partial_braking: true,
            forced_trigger_ttc: None,
        }
    }
}

impl DecisionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.ttc_warn > self.ttc_partial && self.ttc_partial > 0.0) {
            return Err(format!(
                "decision thresholds need ttc_warn > ttc_partial > 0, got {} / {}",
                self.ttc_warn, self.ttc_partial
            ));
        }
        if !(0.0 < self.partial_decel && self.partial_decel < self.full_decel) {
            return Err(format!(
                "decision decelerations need 0 < partial_decel < full_decel, got {} / {}",
                self.partial_decel, self.full_decel
            ));
        }
        if !(self.lateral_accel_limit > 0.0) {
            return Err("decision lateral_accel_limit must be > 0".into());
        }
        if !(self.vut_width > 0.0) {
            return Err("decision vut_width must be > 0".into());
        }
        if let Some(t) = self.forced_trigger_ttc {
            if !(t > 0.0 && t.is_finite()) {
                return Err(format!("forced_trigger_ttc must be > 0, got {t}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SituationClass {
    /// In path; the response is braking without evasion.
    NoEvasion,
    EvadeLeft,
    EvadeRight,
    NotInPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Situation {
    pub class: SituationClass,
    /// Cheaper swerve side for diagnostics; `None` when centred or not in path.
    pub escape: Option<SituationClass>,
    /// Lateral distance the VUT has to cover to clear the target (m).
    pub lateral_clearance: f64,
}

/// Smallest positive root of `gap - v t - a t²/2 = 0`.
pub fn compute_ttc(kin: &Kinematics) -> Option<f64> {
    let (gap, v, a) = (kin.gap, kin.closing_speed, kin.closing_accel);
    if gap <= 0.0 {
        return (v > 0.0 || a > 0.0).then_some(0.0);
    }
    if a.abs() < ACCEL_EPS {
        return (v > 0.0).then(|| gap / v);
    }
    // a/2 t² + v t - gap = 0
    let disc = v * v + 2.0 * a * gap;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Stable pair of roots: q = -(v + sign(v) sq)/2, t1 = q/(a/2), t2 = -gap/q
    let q = -0.5 * (v + if v >= 0.0 { sq } else { -sq });
    let mut roots = [f64::NAN, f64::NAN];
    if q != 0.0 {
        roots[0] = q / (0.5 * a);
        roots[1] = -gap / q;
    } else {
        roots[0] = (2.0 * gap / a).max(0.0).sqrt();
    }
    roots
        .into_iter()
        .filter(|t| t.is_finite() && *t > 0.0)
        .min_by(|a, b| a.total_cmp(b))
}

pub fn classify_situation(kin: &Kinematics, config: &DecisionConfig) -> Situation {
    let half_span = 0.5 * (config.vut_width + kin.target_width);
    let lateral_clearance = half_span - kin.lateral_offset.abs();
    if lateral_clearance <= 0.0 {
        return Situation { class: SituationClass::NotInPath, escape: None, lateral_clearance };
    }
    // Target shifted left leaves more room on the right, and vice versa.
    let escape = if kin.lateral_offset > 0.0 {
        Some(SituationClass::EvadeRight)
    } else if kin.lateral_offset < 0.0 {
        Some(SituationClass::EvadeLeft)
    } else {
        None
    };
    Situation { class: SituationClass::NoEvasion, escape, lateral_clearance }
}

/// Time a constant-lateral-acceleration swerve needs to clear `lateral_clearance`.
pub fn steer_escape_time(lateral_clearance: f64, config: &DecisionConfig) -> f64 {
    debug_assert!(lateral_clearance > 0.0);
    (2.0 * lateral_clearance / config.lateral_accel_limit).sqrt()
}

/// Last TTC at which full braking still stops short (constant closing speed).
pub fn brake_last_point(closing_speed: f64, config: &DecisionConfig) -> f64 {
    closing_speed.max(0.0) / (2.0 * config.full_decel)
}

/// The full-brake threshold for this sample under the configured policy.
pub fn full_brake_threshold(kin: &Kinematics, situation: &Situation, config: &DecisionConfig) -> f64 {
    match config.forced_trigger_ttc {
        Some(t) => t,
        None => brake_last_point(kin.closing_speed, config)
            .min(steer_escape_time(situation.lateral_clearance, config)),
    }
}

/// Memoryless grade for one valid sample.
pub fn grade(kin: &Kinematics, config: &DecisionConfig) -> WarningLevel {
    if !config.enabled {
        return WarningLevel::None;
    }
    let situation = classify_situation(kin, config);
    if situation.class == SituationClass::NotInPath {
        return WarningLevel::None;
    }
    let Some(ttc) = compute_ttc(kin) else {
        return WarningLevel::None;
    };
    if ttc <= full_brake_threshold(kin, &situation, config) {
        WarningLevel::FullBrake
    } else if config.forced_trigger_ttc.is_none() && ttc <= config.ttc_partial {
        WarningLevel::PartialBrake
    } else if ttc <= config.ttc_warn {
        WarningLevel::Warn
    } else {
        WarningLevel::None
    }
}

/// Per-run decision memory: the last grade and how long the track has been lost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionState {
    pub level: WarningLevel,
    pub track_lost_for: f64,
}

impl Default for DecisionState {
    fn default() -> Self {
        Self { level: WarningLevel::None, track_lost_for: 0.0 }
    }
}

/// Grade one sample, honouring the full-brake latch. The latch holds L3 until
/// the track has been invalid for longer than [`LATCH_TRACK_LOSS`]; release at
/// standstill is the caller's job (the run ends there).
pub fn decide(track: &SensorTrack, config: &DecisionConfig, prev: &DecisionState, dt: f64) -> DecisionState {
    let track_lost_for = if track.is_valid() { 0.0 } else { prev.track_lost_for + dt };
    let fresh = match track.kinematics() {
        Some(kin) => grade(kin, config),
        None => WarningLevel::None,
    };
    let latched = config.enabled
        && config.latch_full_brake
        && prev.level == WarningLevel::FullBrake
        && track_lost_for <= LATCH_TRACK_LOSS;
    let level = if latched { WarningLevel::FullBrake } else { fresh };
    DecisionState { level, track_lost_for }
}

pub fn decel_request(level: WarningLevel, config: &DecisionConfig) -> f64 {
    match level {
        WarningLevel::None | WarningLevel::Warn => 0.0,
        WarningLevel::PartialBrake if config.partial_braking => config.partial_decel,
        WarningLevel::PartialBrake => 0.0,
        WarningLevel::FullBrake => config.full_decel,
    }
}
