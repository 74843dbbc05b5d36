//! Protocol test matrix.
//!
//! A [`ProtocolConfig`] lists speed grids per scenario kind (TOML, values in
//! km/h, m and m/s²). Expansion order is fixed: all CCRs cases, then CCRm,
//! then CCRb; inside a kind the lists expand as nested loops in declaration
//! order (VUT speed outermost). Ids look like `ccrs_v10`, `ccrm_v30`
//! (`ccrm_v30_t20` when several target speeds are configured) and
//! `ccrb_h12_d6` (`ccrb_v50_h12_d6` with several speeds).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{InitialGap, ScenarioKind, ScenarioSpec};
use crate::{Error, Result};

pub const DEFAULT_PROTOCOL: &str = include_str!("../../data/euroncap_default.toml");

/// Sanity bound on configured speeds (km/h).
pub const MAX_PROTOCOL_SPEED_KMH: f64 = 300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleDefaults {
    pub mass_kg: f64,
    pub vut_width_m: f64,
    pub target_width_m: f64,
    pub friction: f64,
    pub lateral_offset_m: f64,
}

impl Default for VehicleDefaults {
    fn default() -> Self {
        Self {
            mass_kg: ScenarioSpec::DEFAULT_MASS,
            vut_width_m: ScenarioSpec::DEFAULT_WIDTH,
            target_width_m: ScenarioSpec::DEFAULT_WIDTH,
            friction: 1.0,
            lateral_offset_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcrsGrid {
    pub vut_speeds_kmh: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcrmGrid {
    pub vut_speeds_kmh: Vec<f64>,
    pub target_speeds_kmh: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcrbGrid {
    pub speeds_kmh: Vec<f64>,
    pub headways_m: Vec<f64>,
    pub decels_ms2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    #[serde(default)]
    pub vehicle: VehicleDefaults,
    pub ccrs: Option<CcrsGrid>,
    pub ccrm: Option<CcrmGrid>,
    pub ccrb: Option<CcrbGrid>,
}

impl ProtocolConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Protocol(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("protocol serialises")
    }
}

impl Default for TestMatrix {
    fn default() -> Self {
        let cfg = ProtocolConfig::from_toml_str(DEFAULT_PROTOCOL).expect("bundled protocol parses");
        build_euroncap_matrix(&cfg).expect("bundled protocol expands")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestMatrix {
    pub entries: Vec<ScenarioSpec>,
}

fn tag(v: f64) -> String {
    let s = format!("{v}");
    s.replace('.', "p").replace('-', "m")
}

fn check_grid(kind: &str, name: &str, values: &[f64], speed: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Protocol(format!("{kind}.{name}: empty grid")));
    }
    for &v in values {
        let bad = if speed {
            !(0.0..=MAX_PROTOCOL_SPEED_KMH).contains(&v)
        } else {
            !(v.is_finite() && v > 0.0)
        };
        if bad {
            let bound = if speed { "outside [0, 300] km/h" } else { "must be > 0" };
            return Err(Error::Protocol(format!("{kind}.{name}: value {v} {bound}")));
        }
    }
    Ok(())
}

fn base(id: String, kind: ScenarioKind, v: &VehicleDefaults) -> ScenarioSpec {
    ScenarioSpec {
        vut_mass: v.mass_kg,
        vut_width: v.vut_width_m,
        target_width: v.target_width_m,
        road_friction: v.friction,
        lateral_offset: v.lateral_offset_m,
        ..ScenarioSpec::new(id, kind, 0.0, 0.0)
    }
}

pub fn build_euroncap_matrix(config: &ProtocolConfig) -> Result<TestMatrix> {
    let mut entries = Vec::new();
    let veh = &config.vehicle;
    if let Some(g) = &config.ccrs {
        check_grid("ccrs", "vut_speeds_kmh", &g.vut_speeds_kmh, true)?;
        for &v in &g.vut_speeds_kmh {
            entries.push(ScenarioSpec {
                vut_speed: v / 3.6,
                ..base(format!("ccrs_v{}", tag(v)), ScenarioKind::Ccrs, veh)
            });
        }
    }
    if let Some(g) = &config.ccrm {
        check_grid("ccrm", "vut_speeds_kmh", &g.vut_speeds_kmh, true)?;
        check_grid("ccrm", "target_speeds_kmh", &g.target_speeds_kmh, true)?;
        let multi = g.target_speeds_kmh.len() > 1;
        for &v in &g.vut_speeds_kmh {
            for &t in &g.target_speeds_kmh {
                let id = if multi { format!("ccrm_v{}_t{}", tag(v), tag(t)) } else { format!("ccrm_v{}", tag(v)) };
                entries.push(ScenarioSpec {
                    vut_speed: v / 3.6,
                    target_speed: t / 3.6,
                    ..base(id, ScenarioKind::Ccrm, veh)
                });
            }
        }
    }
    if let Some(g) = &config.ccrb {
        check_grid("ccrb", "speeds_kmh", &g.speeds_kmh, true)?;
        check_grid("ccrb", "headways_m", &g.headways_m, false)?;
        check_grid("ccrb", "decels_ms2", &g.decels_ms2, false)?;
        let multi = g.speeds_kmh.len() > 1;
        for &v in &g.speeds_kmh {
            for &h in &g.headways_m {
                for &d in &g.decels_ms2 {
                    let prefix = if multi { format!("ccrb_v{}_", tag(v)) } else { "ccrb_".to_string() };
                    entries.push(ScenarioSpec {
                        vut_speed: v / 3.6,
                        target_speed: v / 3.6,
                        target_decel: d,
                        initial_gap: InitialGap::Fixed(h),
                        ..base(format!("{prefix}h{}_d{}", tag(h), tag(d)), ScenarioKind::Ccrb, veh)
                    });
                }
            }
        }
    }
    for e in &entries {
        e.check()?;
    }
    Ok(TestMatrix { entries })
}
