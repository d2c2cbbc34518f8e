//! Run manifests: everything needed to re-run a command bit-identically.

use crate::commands::{BandArgs, FitArgs, SimulateArgs};
use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// The resolved command a manifest can replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum ResolvedCommand {
    Fit(FitArgs),
    Band(BandArgs),
    Simulate(SimulateArgs),
}

/// Written next to every command's outputs as `run_manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    #[serde(flatten)]
    pub command: ResolvedCommand,
    /// SHA-256 of the input file, when the command reads one.
    pub input_digest: Option<String>,
    /// Output files, relative to the output directory.
    pub outputs: Vec<String>,
    pub timings_ms: u64,
}

impl RunManifest {
    pub fn new(command: ResolvedCommand, input_digest: Option<String>) -> Self {
        RunManifest {
            version: format!("{}-{}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            command,
            input_digest,
            outputs: Vec::new(),
            timings_ms: 0,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf, CliError> {
        let path = dir.join("run_manifest.json");
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        convexreg::sim::write_atomic(&path, (body + "\n").as_bytes())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let body = std::fs::read_to_string(path)?;
        serde_json::from_str(&body).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

/// SHA-256 hex digest of a file.
pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}
