use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Written as `manifest.json` next to the data files. Only the two
/// timestamps differ between reruns of the same config and seed.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<OutputFile>,
}

pub fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn hash_file(path: &Path) -> std::io::Result<OutputFile> {
    let bytes = std::fs::read(path)?;
    Ok(OutputFile {
        file: path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value, started_unix: f64) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config,
            started_unix,
            finished_unix: started_unix,
            outputs: Vec::new(),
        }
    }

    /// Hashes `files`, stamps the finish time and writes `dir/manifest.json`.
    pub fn finish(mut self, dir: &Path, files: &[PathBuf]) -> std::io::Result<PathBuf> {
        self.outputs = files.iter().map(|f| hash_file(f)).collect::<std::io::Result<_>>()?;
        self.finished_unix = now();
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self).map_err(std::io::Error::other)?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
