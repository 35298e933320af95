//! Subcommand implementations. Each returns a process exit code:
//! 0 success, 1 check/audit failure or runtime error, 2 config error.

pub mod audit;
pub mod compare;
pub mod controllability;
pub mod recover;
pub mod simulate;
pub mod sweep;

use crate::config::ExperimentConfig;
use crate::manifest::{prepare_out_dir, RunManifest};
use anyhow::Result;
use std::path::Path;

pub(crate) fn start_manifest(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    command: &str,
) -> Result<RunManifest> {
    prepare_out_dir(out_dir, &cfg.to_toml())?;
    Ok(RunManifest::new(command, cfg.sim.seed, cfg.stable_hash()))
}
