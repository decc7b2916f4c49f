use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

/// Provenance record written into every output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// SHA-256 of the resolved configuration as JSON.
    pub config_hash: String,
    pub seeds: Vec<u64>,
    /// Files written by the command, relative to the directory, sorted.
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
}

pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes");
    hex::encode(Sha256::digest(&bytes))
}

impl RunManifest {
    pub fn new(command: &str, hash: &str, seeds: Vec<u64>, dir: &Path, files: &[PathBuf], elapsed: Duration) -> Self {
        let mut files: Vec<String> = files
            .iter()
            .map(|f| f.strip_prefix(dir).unwrap_or(f).to_string_lossy().replace('\\', "/"))
            .collect();
        files.sort();
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: hash.to_string(),
            seeds,
            files,
            wall_clock_seconds: elapsed.as_secs_f64(),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
