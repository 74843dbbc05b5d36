//! Longitudinal point-mass vehicle motion and the brake actuator.
//!
//! Everything here is SI. Positions run along the travel axis; the VUT is
//! tracked by its front bumper and the target by its rear bumper so the
//! longitudinal clearance is a plain difference.

use serde::{Deserialize, Serialize};

/// Standard gravity used for the friction limit.
pub const GRAVITY: f64 = 9.81;

// Slack when comparing accumulated dead time against the configured delay,
// so 150 steps of 1 ms reach a 0.15 s delay despite rounding.
const DEAD_TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub t: f64,
    pub x: f64,
    /// Lateral centre offset, constant for the whole run.
    pub y: f64,
    pub v: f64,
    /// Signed acceleration applied over the last step, braking negative.
    pub a: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, v: f64) -> Self {
        Self { t: 0.0, x, y, v, a: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadCondition {
    pub friction: f64,
}

impl RoadCondition {
    pub fn new(friction: f64) -> Self {
        Self { friction }
    }

    pub fn friction_limit(&self) -> f64 {
        self.friction * GRAVITY
    }
}

/// Brake system parameters. `jerk_limit` and `max_force` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrakeConfig {
    /// Dead time between the first non-zero request and pressure build-up (s).
    pub delay: f64,
    /// Ramp rate of the achieved deceleration (m/s³).
    pub jerk_limit: f64,
    /// Largest braking force the system can apply (N).
    pub max_force: f64,
}

impl Default for BrakeConfig {
    fn default() -> Self {
        Self {
            delay: 0.15,
            jerk_limit: 60.0,
            max_force: 13_500.0,
        }
    }
}

impl BrakeConfig {
    /// Zero dead time and unlimited jerk; the force limit is kept.
    pub fn ideal() -> Self {
        Self {
            delay: 0.0,
            jerk_limit: f64::INFINITY,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.delay >= 0.0 && self.delay.is_finite()) {
            return Err(format!("brake delay must be finite and >= 0, got {}", self.delay));
        }
        if !(self.jerk_limit > 0.0) {
            return Err(format!("brake jerk_limit must be > 0, got {}", self.jerk_limit));
        }
        if !(self.max_force > 0.0) {
            return Err(format!("brake max_force must be > 0, got {}", self.max_force));
        }
        Ok(())
    }
}

/// Brake actuator with dead time and a jerk-limited ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrakeActuator {
    pub config: BrakeConfig,
    /// Achieved deceleration magnitude (m/s², ≥ 0).
    pub current_decel: f64,
    /// Time since the request went non-zero from a fully released state.
    /// `None` while released.
    pub since_request: Option<f64>,
}

impl BrakeActuator {
    pub fn new(config: BrakeConfig) -> Self {
        Self {
            config,
            current_decel: 0.0,
            since_request: None,
        }
    }

    /// An actuator that follows its target instantly, used for the target
    /// vehicle whose deceleration is prescribed by the protocol.
    pub fn ideal_target() -> Self {
        Self::new(BrakeConfig {
            delay: 0.0,
            jerk_limit: f64::INFINITY,
            max_force: f64::INFINITY,
        })
    }

    /// Advance by `dt` towards `target` (already limited by [`effective_decel`]).
    ///
    /// The dead time only applies when braking starts from a fully released
    /// actuator; a request that drops to zero and comes back while pressure is
    /// still present ramps immediately.
    pub fn step(mut self, target: f64, dt: f64) -> Self {
        debug_assert!(dt > 0.0);
        let target = target.max(0.0);
        if target > 0.0 {
            let elapsed = self.since_request.unwrap_or(0.0);
            self.since_request = Some(elapsed + dt);
            if self.current_decel == 0.0 && elapsed + DEAD_TIME_EPS < self.config.delay {
                return self;
            }
        }
        let max_delta = self.config.jerk_limit * dt;
        let diff = target - self.current_decel;
        self.current_decel = if diff.abs() <= max_delta {
            target
        } else {
            self.current_decel + max_delta.copysign(diff)
        };
        if target == 0.0 && self.current_decel == 0.0 {
            self.since_request = None;
        }
        self
    }
}

/// Steady-state deceleration the actuator can reach for `request`.
pub fn effective_decel(request: f64, actuator: &BrakeActuator, mass: f64, road: &RoadCondition) -> f64 {
    request
        .max(0.0)
        .min(actuator.config.max_force / mass)
        .min(road.friction_limit())
}

/// Convenience form of [`BrakeActuator::step`].
pub fn actuator_step(actuator: BrakeActuator, request: f64, dt: f64) -> BrakeActuator {
    actuator.step(request, dt)
}

/// Semi-implicit Euler step. Braking at standstill does not reverse the car.
pub fn step(state: VehicleState, commanded_accel: f64, dt: f64) -> VehicleState {
    debug_assert!(dt > 0.0);
    let raw = state.v + commanded_accel * dt;
    let (v, a) = if raw <= 0.0 && commanded_accel <= 0.0 {
        let a = if state.v > 0.0 { -state.v / dt } else { 0.0 };
        (0.0, a)
    } else {
        (raw.max(0.0), commanded_accel)
    };
    VehicleState {
        t: state.t + dt,
        x: state.x + v * dt,
        y: state.y,
        v,
        a,
    }
}
