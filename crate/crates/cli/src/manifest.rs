//! Run manifest: every output directory gets one, tying the artifacts back
//! to the configuration and seed that produced them.

use anyhow::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    /// File the effective configuration was copied to.
    pub config_copy: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config_hash: String) -> Self {
        RunManifest {
            tool: "liftquad".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config_hash,
            config_copy: "config_used.toml".into(),
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)?;
        std::fs::write(out_dir.join("manifest.toml"), text)?;
        Ok(())
    }
}

/// Creates the output directory and drops a copy of the effective config.
pub fn prepare_out_dir(
    out_dir: &Path,
    config_toml: &str,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("config_used.toml"), config_toml)?;
    Ok(())
}
