//! Stored baselines and regression comparison.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MatrixReport;
use crate::{Error, Result};

pub const BASELINE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// m/s
    pub impact_speed_tol: f64,
    pub points_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { impact_speed_tol: 0.01, points_tol: 0.001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub impact_speed: f64,
    pub points: f64,
    pub trigger_ttc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineMeta {
    pub config_hash: String,
    pub dt: f64,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub schema_version: u32,
    pub metadata: BaselineMeta,
    pub tolerances: Tolerances,
    pub entries: BTreeMap<String, BaselineEntry>,
}

impl Baseline {
    /// Record completed runs; failed runs are left out and will show up as
    /// missing when compared.
    pub fn from_report(report: &MatrixReport, config_hash: String, dt: f64, created_unix: u64) -> Self {
        let entries = report
            .entries
            .iter()
            .filter_map(|e| {
                let (r, s) = e.outcome.completed()?;
                Some((e.spec.id.clone(), BaselineEntry { impact_speed: r.impact_speed, points: s.points, trigger_ttc: r.trigger_ttc }))
            })
            .collect();
        Baseline {
            schema_version: BASELINE_SCHEMA_VERSION,
            metadata: BaselineMeta { config_hash, dt, created_unix },
            tolerances: Tolerances::default(),
            entries,
        }
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("baseline serialises");
        let mut s = serde_json::to_string_pretty(&value).expect("value serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let b: Baseline = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if b.schema_version != BASELINE_SCHEMA_VERSION {
            return Err(format!("unsupported baseline schema version {}", b.schema_version));
        }
        Ok(b)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|msg| Error::Format { path: path.to_path_buf(), msg })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Pass,
    Fail,
    /// In the baseline but absent (or failed) in the current run.
    Missing,
    /// In the current run but not in the baseline.
    Unexpected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionEntry {
    pub spec_id: String,
    pub status: EntryStatus,
    pub delta_impact_speed: Option<f64>,
    pub delta_points: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Regression,
    Incomparable,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Regression => 1,
            Verdict::Incomparable => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub verdict: Verdict,
    pub message: String,
    pub baseline_hash: String,
    pub current_hash: String,
    pub entries: Vec<RegressionEntry>,
}

impl RegressionReport {
    pub fn failures(&self) -> impl Iterator<Item = &RegressionEntry> {
        self.entries.iter().filter(|e| e.status != EntryStatus::Pass)
    }
}

/// Compare current results to a baseline. A differing environment hash
/// refuses the comparison outright.
pub fn regression_compare(current: &MatrixReport, current_hash: &str, baseline: &Baseline) -> RegressionReport {
    let mut report = RegressionReport {
        verdict: Verdict::Incomparable,
        message: String::new(),
        baseline_hash: baseline.metadata.config_hash.clone(),
        current_hash: current_hash.to_string(),
        entries: Vec::new(),
    };
    if baseline.metadata.config_hash != current_hash {
        report.message = "environment hash differs from baseline; results not compared".into();
        return report;
    }
    let tol = baseline.tolerances;
    let mut seen = std::collections::BTreeSet::new();
    for e in &current.entries {
        let id = e.spec.id.clone();
        seen.insert(id.clone());
        let entry = match (baseline.entries.get(&id), e.outcome.completed()) {
            (None, _) => RegressionEntry { spec_id: id, status: EntryStatus::Unexpected, delta_impact_speed: None, delta_points: None },
            (Some(_), None) => RegressionEntry { spec_id: id, status: EntryStatus::Missing, delta_impact_speed: None, delta_points: None },
            (Some(b), Some((r, s))) => {
                let di = r.impact_speed - b.impact_speed;
                let dp = s.points - b.points;
                let ok = di.abs() <= tol.impact_speed_tol && dp.abs() <= tol.points_tol;
                RegressionEntry {
                    spec_id: id,
                    status: if ok { EntryStatus::Pass } else { EntryStatus::Fail },
                    delta_impact_speed: Some(di),
                    delta_points: Some(dp),
                }
            }
        };
        report.entries.push(entry);
    }
    for id in baseline.entries.keys().filter(|id| !seen.contains(*id)) {
        report.entries.push(RegressionEntry { spec_id: id.clone(), status: EntryStatus::Missing, delta_impact_speed: None, delta_points: None });
    }
    let failed = report.failures().count();
    if failed == 0 {
        report.verdict = Verdict::Pass;
        report.message = format!("{} cases within tolerance", report.entries.len());
    } else {
        report.verdict = Verdict::Regression;
        let missing = report.failures().filter(|e| e.status == EntryStatus::Missing).count();
        report.message = format!("{failed} of {} cases regressed ({missing} missing)", report.entries.len());
    }
    report
}
