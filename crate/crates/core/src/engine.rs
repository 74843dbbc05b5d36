//! Closed-loop, fixed-step orchestration of sensor, decision and vehicle
//! dynamics, with collision detection and trace recording.
//!
//! Each step: observe (through the latency buffer) → decide → request →
//! actuator → integrate both vehicles → check contact and termination.

use std::io::{self, BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::decision::{compute_ttc, decel_request, decide, DecisionState, WarningLevel};
use crate::dynamics::{self, effective_decel, BrakeActuator, RoadCondition, VehicleState};
use crate::perception::{observe, LatencyBuffer};
use crate::scenario::{ScenarioKind, ScenarioSpec};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "t,x_vut,v_vut,a_vut,x_tgt,v_tgt,a_tgt,gap,ttc,warning_level,decel_request,decel_achieved";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub x_vut: f64,
    pub v_vut: f64,
    pub a_vut: f64,
    pub x_tgt: f64,
    pub v_tgt: f64,
    pub a_tgt: f64,
    pub gap: f64,
    pub ttc: Option<f64>,
    pub warning_level: WarningLevel,
    pub decel_request: f64,
    pub decel_achieved: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    FirstDetection,
    L1,
    L2,
    L3,
    Collision,
    Standstill,
    /// The gap can no longer close: the VUT is not faster than a
    /// constant-speed target, or it passed the target without overlap.
    Separated,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub samples: Vec<TraceSample>,
    pub events: Vec<TraceEvent>,
}

impl SimTrace {
    pub fn event(&self, kind: EventKind) -> Option<&TraceEvent> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Collision,
    Standstill,
    Separated,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub spec_id: String,
    pub collided: bool,
    /// Relative closing speed at first contact (m/s); 0 when avoided.
    pub impact_speed: f64,
    /// Absolute VUT speed at first contact (m/s); 0 when avoided.
    pub vut_speed_at_impact: f64,
    pub min_gap: f64,
    /// TTC reported at the first full-brake sample.
    pub trigger_ttc: Option<f64>,
    pub duration: f64,
    pub seed: u64,
    pub termination: Termination,
}

/// Longitudinal contact with positive lateral overlap.
pub fn detect_collision(vut: &VehicleState, target: &VehicleState, vut_width: f64, target_width: f64) -> bool {
    let gap = target.x - vut.x;
    let overlap = 0.5 * (vut_width + target_width) - (target.y - vut.y).abs();
    gap <= 0.0 && overlap > 0.0
}

/// File name of a trace written by the CLI.
pub fn trace_file_name(spec_id: &str, seed: u64) -> String {
    format!("{spec_id}_{seed}.csv")
}

fn finite(s: &VehicleState) -> bool {
    s.x.is_finite() && s.v.is_finite() && s.a.is_finite()
}

/// Run one scenario and record its full trace.
pub fn run(spec: &ScenarioSpec, config: &SimConfig, seed: u64) -> Result<(RunResult, SimTrace)> {
    let mut trace = SimTrace::default();
    let result = simulate(spec, config, seed, Some(&mut trace))?;
    Ok((result, trace))
}

/// Run one scenario keeping only events, not per-step samples.
pub fn run_summary(spec: &ScenarioSpec, config: &SimConfig, seed: u64) -> Result<RunResult> {
    simulate(spec, config, seed, None)
}

fn simulate(spec: &ScenarioSpec, base: &SimConfig, seed: u64, mut trace: Option<&mut SimTrace>) -> Result<RunResult> {
    spec.check()?;
    let cfg = spec.resolve_config(base)?;
    let dt = cfg.dt;
    let gap0 = spec.initial_gap.resolve(&cfg);
    let road = RoadCondition::new(spec.road_friction);
    let target_request = if spec.kind == ScenarioKind::Ccrb { spec.target_decel } else { 0.0 };

    let mut vut = VehicleState::new(0.0, 0.0, spec.vut_speed);
    let mut tgt = VehicleState::new(gap0, spec.lateral_offset, spec.target_speed);
    let mut brake = BrakeActuator::new(cfg.brake);
    let mut target_brake = BrakeActuator::ideal_target();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut latency = LatencyBuffer::new(cfg.sensor.latency_steps(dt));
    let mut state = DecisionState::default();

    let mut events = Vec::new();
    let mut detected = false;
    let mut trigger_ttc = None;
    let mut min_gap = gap0;
    let max_steps = (cfg.timeout / dt).round() as u64;

    let abort = |t: f64, msg: &str| Error::Aborted { id: spec.id.clone(), t, msg: msg.to_string() };

    for k in 0..max_steps {
        let t = k as f64 * dt;
        let track = latency.push(observe(&vut, &tgt, spec.target_width, &cfg.sensor, &mut rng));
        if track.is_valid() && !detected {
            detected = true;
            events.push(TraceEvent { t, kind: EventKind::FirstDetection });
        }
        let ttc = track.kinematics().and_then(compute_ttc);
        let prev_level = state.level;
        state = decide(&track, &cfg.decision, &state, dt);
        if state.level != prev_level {
            let kind = match state.level {
                WarningLevel::Warn => Some(EventKind::L1),
                WarningLevel::PartialBrake => Some(EventKind::L2),
                WarningLevel::FullBrake => Some(EventKind::L3),
                WarningLevel::None => None,
            };
            events.extend(kind.map(|kind| TraceEvent { t, kind }));
        }
        if state.level == WarningLevel::FullBrake && trigger_ttc.is_none() {
            trigger_ttc = ttc;
        }

        let request = decel_request(state.level, &cfg.decision);
        brake = brake.step(effective_decel(request, &brake, spec.vut_mass, &road), dt);
        target_brake = target_brake.step(target_request, dt);

        let mut next_vut = dynamics::step(vut, -brake.current_decel, dt);
        let mut next_tgt = dynamics::step(tgt, -target_brake.current_decel, dt);
        next_vut.t = (k + 1) as f64 * dt;
        next_tgt.t = next_vut.t;
        if !finite(&next_vut) || !finite(&next_tgt) {
            return Err(abort(t, "non-finite vehicle state"));
        }

        let gap = tgt.x - vut.x;
        if let Some(tr) = trace.as_deref_mut() {
            tr.samples.push(TraceSample {
                t,
                x_vut: vut.x,
                v_vut: vut.v,
                a_vut: next_vut.a,
                x_tgt: tgt.x,
                v_tgt: tgt.v,
                a_tgt: next_tgt.a,
                gap,
                ttc,
                warning_level: state.level,
                decel_request: request,
                decel_achieved: brake.current_decel,
            });
        }

        let next_gap = next_tgt.x - next_vut.x;
        min_gap = min_gap.min(next_gap.max(0.0));
        if next_gap <= 0.0 {
            if detect_collision(&next_vut, &next_tgt, spec.vut_width, spec.target_width) {
                // linear interpolation of the contact instant inside the step
                let frac = if gap > next_gap { gap / (gap - next_gap) } else { 1.0 };
                let closing0 = vut.v - tgt.v;
                let closing1 = next_vut.v - next_tgt.v;
                let impact = closing0 + frac * (closing1 - closing0);
                let vut_speed = vut.v + frac * (next_vut.v - vut.v);
                let t_contact = t + frac * dt;
                events.push(TraceEvent { t: t_contact, kind: EventKind::Collision });
                if let Some(tr) = trace {
                    tr.events = events;
                }
                return Ok(RunResult {
                    spec_id: spec.id.clone(),
                    collided: true,
                    impact_speed: impact.max(0.0),
                    vut_speed_at_impact: vut_speed.max(0.0),
                    min_gap: 0.0,
                    trigger_ttc,
                    duration: t_contact,
                    seed,
                    termination: Termination::Collision,
                });
            }
            return Ok(finish(spec, seed, events, trace, next_vut.t, Termination::Separated, min_gap, trigger_ttc));
        }
        vut = next_vut;
        tgt = next_tgt;

        if vut.v == 0.0 {
            return Ok(finish(spec, seed, events, trace, vut.t, Termination::Standstill, min_gap, trigger_ttc));
        }
        if vut.v <= tgt.v && target_brake.current_decel == 0.0 {
            return Ok(finish(spec, seed, events, trace, vut.t, Termination::Separated, min_gap, trigger_ttc));
        }
    }
    let end = max_steps as f64 * dt;
    Ok(finish(spec, seed, events, trace, end, Termination::Timeout, min_gap, trigger_ttc))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    spec: &ScenarioSpec,
    seed: u64,
    mut events: Vec<TraceEvent>,
    trace: Option<&mut SimTrace>,
    t: f64,
    termination: Termination,
    min_gap: f64,
    trigger_ttc: Option<f64>,
) -> RunResult {
    let kind = match termination {
        Termination::Standstill => EventKind::Standstill,
        Termination::Separated => EventKind::Separated,
        Termination::Timeout | Termination::Collision => EventKind::Timeout,
    };
    events.push(TraceEvent { t, kind });
    if let Some(tr) = trace {
        tr.events = events;
    }
    RunResult {
        spec_id: spec.id.clone(),
        collided: false,
        impact_speed: 0.0,
        vut_speed_at_impact: 0.0,
        min_gap,
        trigger_ttc,
        duration: t,
        seed,
        termination,
    }
}

fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Write the trace as CSV: fixed header, 6 decimals, empty field for a
/// missing TTC, `\n` line endings and no trailing blank line.
pub fn write_trace_csv<W: Write>(trace: &SimTrace, sink: &mut W) -> io::Result<usize> {
    let mut out = String::with_capacity(64 * (trace.samples.len() + 1));
    out.push_str(CSV_HEADER);
    for s in &trace.samples {
        out.push('\n');
        let ttc = s.ttc.map(fmt6).unwrap_or_default();
        let fields = [
            fmt6(s.t),
            fmt6(s.x_vut),
            fmt6(s.v_vut),
            fmt6(s.a_vut),
            fmt6(s.x_tgt),
            fmt6(s.v_tgt),
            fmt6(s.a_tgt),
            fmt6(s.gap),
            ttc,
            s.warning_level.as_u8().to_string(),
            fmt6(s.decel_request),
            fmt6(s.decel_achieved),
        ];
        out.push_str(&fields.join(","));
    }
    sink.write_all(out.as_bytes())?;
    Ok(out.len())
}

/// Read a trace written by [`write_trace_csv`].
pub fn read_trace_csv<R: BufRead>(reader: R) -> io::Result<Vec<TraceSample>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h == CSV_HEADER => {}
        _ => return Err(bad("missing or unexpected CSV header".into())),
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(bad(format!("row {}: expected 12 fields, got {}", n + 1, f.len())));
        }
        let num = |i: usize| f[i].parse::<f64>().map_err(|e| bad(format!("row {}: field {i}: {e}", n + 1)));
        let warning_level = match f[9] {
            "0" => WarningLevel::None,
            "1" => WarningLevel::Warn,
            "2" => WarningLevel::PartialBrake,
            "3" => WarningLevel::FullBrake,
            other => return Err(bad(format!("row {}: bad warning level `{other}`", n + 1))),
        };
        out.push(TraceSample {
            t: num(0)?,
            x_vut: num(1)?,
            v_vut: num(2)?,
            a_vut: num(3)?,
            x_tgt: num(4)?,
            v_tgt: num(5)?,
            a_tgt: num(6)?,
            gap: num(7)?,
            ttc: if f[8].is_empty() { None } else { Some(num(8)?) },
            warning_level,
            decel_request: num(10)?,
            decel_achieved: num(11)?,
        });
    }
    Ok(out)
}
