//! Sensor model: ideal relative kinematics, optionally degraded by noise,
//! dropout and latency, and always limited by range and field of view.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::VehicleState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorMode {
    Ideal,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub mode: SensorMode,
    /// Detection range (m).
    pub max_range: f64,
    /// Half opening angle of the field of view (rad).
    pub fov_half_angle: f64,
    pub range_noise_sigma: f64,
    pub rate_noise_sigma: f64,
    pub dropout_prob: f64,
    /// Reporting delay (s), realised in whole simulation steps.
    pub latency: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            mode: SensorMode::Ideal,
            max_range: 100.0,
            fov_half_angle: 30f64.to_radians(),
            range_noise_sigma: 0.0,
            rate_noise_sigma: 0.0,
            dropout_prob: 0.0,
            latency: 0.0,
        }
    }
}

impl SensorConfig {
    /// Degradations that actually take effect; Ideal mode zeroes them all.
    pub fn effective(&self) -> Self {
        match self.mode {
            SensorMode::Noisy => *self,
            SensorMode::Ideal => Self {
                range_noise_sigma: 0.0,
                rate_noise_sigma: 0.0,
                dropout_prob: 0.0,
                latency: 0.0,
                ..*self
            },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.max_range > 0.0) {
            return Err(format!("sensor max_range must be > 0, got {}", self.max_range));
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle <= std::f64::consts::PI) {
            return Err(format!("sensor fov_half_angle must be in (0, pi], got {}", self.fov_half_angle));
        }
        if !(self.range_noise_sigma >= 0.0 && self.rate_noise_sigma >= 0.0) {
            return Err("sensor noise sigmas must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.dropout_prob) {
            return Err(format!("sensor dropout_prob must be in [0, 1], got {}", self.dropout_prob));
        }
        if !(self.latency >= 0.0 && self.latency.is_finite()) {
            return Err(format!("sensor latency must be finite and >= 0, got {}", self.latency));
        }
        Ok(())
    }

    /// Latency as a number of whole steps.
    pub fn latency_steps(&self, dt: f64) -> usize {
        (self.effective().latency / dt).round() as usize
    }
}

/// Relative kinematics as reported to the decision algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    /// Clearance between VUT front and target rear (m).
    pub gap: f64,
    /// Positive while approaching (m/s).
    pub closing_speed: f64,
    /// Positive while the closure accelerates (m/s²).
    pub closing_accel: f64,
    pub lateral_offset: f64,
    pub target_width: f64,
}

/// A track sample; `None` when the target is not visible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorTrack(pub Option<Kinematics>);

impl SensorTrack {
    pub const INVALID: SensorTrack = SensorTrack(None);

    pub fn valid(kin: Kinematics) -> Self {
        SensorTrack(Some(kin))
    }

    pub fn is_valid(&self) -> bool {
        self.0.is_some()
    }

    pub fn kinematics(&self) -> Option<&Kinematics> {
        self.0.as_ref()
    }
}

/// Exact relative kinematics between the two vehicles.
pub fn ground_truth(vut: &VehicleState, target: &VehicleState, target_width: f64) -> Kinematics {
    Kinematics {
        gap: target.x - vut.x,
        closing_speed: vut.v - target.v,
        closing_accel: vut.a - target.a,
        lateral_offset: target.y - vut.y,
        target_width,
    }
}

fn visible(kin: &Kinematics, config: &SensorConfig) -> bool {
    let bearing = kin.lateral_offset.abs().atan2(kin.gap.max(0.0));
    kin.gap <= config.max_range && bearing <= config.fov_half_angle
}

/// Produce one sensor sample. Visibility is judged on the true geometry;
/// noise and dropout are applied afterwards. Latency is handled by
/// [`LatencyBuffer`].
///
/// Three draws are taken per visible sample (range noise, rate noise,
/// dropout) regardless of configuration so the random stream layout does not
/// depend on which degradations are enabled.
pub fn observe<R: Rng + ?Sized>(
    vut: &VehicleState,
    target: &VehicleState,
    target_width: f64,
    config: &SensorConfig,
    rng: &mut R,
) -> SensorTrack {
    let truth = ground_truth(vut, target, target_width);
    if !visible(&truth, config) {
        return SensorTrack::INVALID;
    }
    match config.mode {
        SensorMode::Ideal => SensorTrack::valid(truth),
        SensorMode::Noisy => {
            let range_z: f64 = rng.sample(StandardNormal);
            let rate_z: f64 = rng.sample(StandardNormal);
            let drop_u: f64 = rng.random();
            if drop_u < config.dropout_prob {
                return SensorTrack::INVALID;
            }
            SensorTrack::valid(Kinematics {
                gap: (truth.gap + config.range_noise_sigma * range_z).max(0.0),
                closing_speed: truth.closing_speed + config.rate_noise_sigma * rate_z,
                ..truth
            })
        }
    }
}

/// Fixed-length delay line for sensor samples. Reports invalid until filled.
#[derive(Debug, Clone)]
pub struct LatencyBuffer {
    delay: usize,
    queue: VecDeque<SensorTrack>,
}

impl LatencyBuffer {
    pub fn new(delay_steps: usize) -> Self {
        Self {
            delay: delay_steps,
            queue: VecDeque::with_capacity(delay_steps + 1),
        }
    }

    pub fn push(&mut self, track: SensorTrack) -> SensorTrack {
        if self.delay == 0 {
            return track;
        }
        self.queue.push_back(track);
        if self.queue.len() > self.delay {
            self.queue.pop_front().unwrap_or(SensorTrack::INVALID)
        } else {
            SensorTrack::INVALID
        }
    }
}
