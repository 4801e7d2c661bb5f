//! Run manifest, written before any other output of a run.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub rng_version: u32,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub outputs: Vec<PathBuf>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: "shsim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rng_version: crate::rng::RNG_VERSION,
            command: command.into(),
            seed: config.integrator.seed,
            config_hash: format!("{:016x}", config.hash()),
            started_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            outputs,
            config: config.clone(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(FILE_NAME);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
