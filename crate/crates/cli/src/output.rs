//! Output files, digests and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const TOOL: &str = "recind";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files written into one output directory, in write order.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, contents)?;
        self.written.push((name.to_string(), sha256_hex(contents.as_bytes())));
        Ok(path)
    }

    pub fn digests(&self) -> Vec<FileDigest> {
        self.written
            .iter()
            .map(|(file, sha256)| FileDigest {
                file: file.clone(),
                sha256: sha256.clone(),
            })
            .collect()
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Timestamps {
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    /// `source-date-epoch` when pinned through SOURCE_DATE_EPOCH, else `wall-clock`.
    pub clock: &'static str,
}

impl Timestamps {
    /// Honors SOURCE_DATE_EPOCH so reruns can produce identical manifests.
    pub fn now() -> Self {
        if let Some(secs) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
            return Timestamps {
                created_unix: secs,
                clock: "source-date-epoch",
            };
        }
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Timestamps {
            created_unix: secs,
            clock: "wall-clock",
        }
    }
}

/// Everything needed to rerun and audit a command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Effective configuration as sorted `key = value` lines.
    pub config: Vec<String>,
    pub seed: u64,
    pub timestamps: Timestamps,
    pub outputs: Vec<FileDigest>,
}

/// Recomputes the digests listed in a manifest against the files next to it.
pub fn verify_manifest(dir: &Path, manifest_json: &str) -> CliResult<bool> {
    let v: serde_json::Value = serde_json::from_str(manifest_json)?;
    let outputs = v["outputs"].as_array().cloned().unwrap_or_default();
    for entry in outputs {
        let file = entry["file"].as_str().unwrap_or_default();
        let want = entry["sha256"].as_str().unwrap_or_default();
        let bytes = fs::read(dir.join(file))?;
        if sha256_hex(&bytes) != want {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
