use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub args: Vec<String>,
    pub inputs: Vec<InputFile>,
    pub seeds: serde_json::Map<String, serde_json::Value>,
    pub tool_version: String,
    pub timestamp_unix: u64,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            args: std::env::args().skip(1).collect(),
            inputs: Vec::new(),
            seeds: serde_json::Map::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, label: &str, text: &str) {
        self.inputs.push(InputFile {
            path: label.to_string(),
            sha256: sha256_hex(text.as_bytes()),
        });
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.to_string(), value.into());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes `<first output>.manifest.json`; returns its path.
    pub fn write_beside(&self, primary: &Path) -> Result<PathBuf> {
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
