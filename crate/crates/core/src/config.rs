//! Run-wide configuration shared by every scenario of a batch.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decision::DecisionConfig;
use crate::dynamics::BrakeConfig;
use crate::perception::SensorConfig;
use crate::Error;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_TIMEOUT: f64 = 60.0;
/// Extra distance beyond the sensor range for `initial_gap: auto`.
pub const AUTO_GAP_MARGIN: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub timeout: f64,
    pub sensor: SensorConfig,
    pub decision: DecisionConfig,
    pub brake: BrakeConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            timeout: DEFAULT_TIMEOUT,
            sensor: SensorConfig::default(),
            decision: DecisionConfig::default(),
            brake: BrakeConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.timeout > 0.0) {
            return Err(Error::Config(format!("timeout must be > 0, got {}", self.timeout)));
        }
        self.sensor.validate().map_err(Error::Config)?;
        self.decision.validate().map_err(Error::Config)?;
        self.brake.validate().map_err(Error::Config)?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, Error> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Initial gap used for `initial_gap: auto`.
    pub fn auto_gap(&self) -> f64 {
        self.sensor.max_range + AUTO_GAP_MARGIN
    }

    /// Hash of the test environment: step size, timeout, sensor and brake.
    /// The decision config is the system under test and is left out so a
    /// baseline stays comparable across algorithm changes.
    pub fn environment_hash(&self, extra: &str) -> String {
        #[derive(Serialize)]
        struct Env<'a> {
            dt: f64,
            timeout: f64,
            sensor: &'a SensorConfig,
            brake: &'a BrakeConfig,
            extra: &'a str,
        }
        let env = Env { dt: self.dt, timeout: self.timeout, sensor: &self.sensor, brake: &self.brake, extra };
        let text = toml::to_string(&env).expect("environment serialises");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
