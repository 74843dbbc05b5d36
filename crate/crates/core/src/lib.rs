//! Closed-loop simulator and evaluation harness for Car-to-Car-Rear AEB/FCW
//! consumer tests.
//!
//! The pipeline is scenario → perception → decision → dynamics, driven by a
//! fixed-step [`engine`]. On top of single runs, [`evaluation`] scores
//! results, executes tolerance sweeps in parallel (feature `parallel`),
//! ranks parameters by main effect and compares against stored baselines.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod decision;
pub mod dynamics;
pub mod engine;
pub mod evaluation;
pub mod parallel;
pub mod perception;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use config::SimConfig;
pub use scenario::{ScenarioKind, ScenarioSpec};

/// Default seed when none is given; fixed so runs reproduce.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Dsl(#[from] scenario::dsl::DslError),
    #[error("invalid scenario `{id}`: {msg}")]
    Scenario { id: String, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("protocol config: {0}")]
    Protocol(String),
    #[error("sweep expands to {count} runs, above the cap of {cap}")]
    RunCap { count: u128, cap: u64 },
    #[error("run `{id}` aborted at t={t:.6}: {msg}")]
    Aborted { id: String, t: f64, msg: String },
    #[error("{msg}")]
    Precondition { msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
