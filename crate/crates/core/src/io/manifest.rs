use serde::{Deserialize, Serialize};
use std::path::Path;

use super::config::Settings;
use super::table::write_json;
use crate::error::Result;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), "/", env!("CARGO_PKG_VERSION"));

/// Written as `manifest.json` next to the outputs of every run. Output paths
/// are relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub settings: Settings,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub version: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, settings: &Settings, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            settings: settings.clone(),
            seed,
            outputs: Vec::new(),
            version: TOOL_VERSION.to_string(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
