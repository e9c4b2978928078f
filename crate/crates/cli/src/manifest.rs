//! Per-directory run manifest. Each pipeline stage run against an output
//! directory records what it read, what it wrote, and the configuration it
//! resolved, all under one `manifest.json` keyed by stage name so a directory
//! hosting several stages still carries exactly one manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const MANIFEST_SCHEMA: &str = "tvae-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub tool_version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StageRecord {
    /// Resolved configuration of the stage, as plain JSON.
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub duration_seconds: f64,
}

/// Insert or replace one stage record in the directory's manifest.
pub fn record_stage(dir: &Path, stage: &str, record: StageRecord) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let mut manifest = if path.exists() {
        let body = fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&body)
            .with_context(|| format!("parsing {}", path.display()))?
    } else {
        Manifest {
            schema: MANIFEST_SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            stages: BTreeMap::new(),
        }
    };
    manifest.stages.insert(stage.to_string(), record);
    let body = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
