//! Per-sample run manifest: what ran, with which inputs, producing which files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{read_file, CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_VERSION: &str = concat!("mesofrac ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Done,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub status: StageStatus,
    /// Digest over every input of the stage, including configs.
    pub inputs_sha256: String,
    pub outputs: Vec<FileRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: Option<u64>,
    /// Config name to content hash.
    pub configs: BTreeMap<String, String>,
    pub created_unix: u64,
    pub updated_unix: u64,
    pub stages: BTreeMap<String, StageRecord>,
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_record(dir: &Path, name: &str) -> CliResult<FileRecord> {
    let bytes = read_file(&dir.join(name))?;
    Ok(FileRecord { path: name.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
}

/// Hash of named parts, order-sensitive and unambiguous.
pub fn combined_hash(parts: &[(&str, &[u8])]) -> String {
    let mut h = Sha256::new();
    for (name, data) in parts {
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((data.len() as u64).to_le_bytes());
        h.update(data);
    }
    format!("{:x}", h.finalize())
}

/// Write via a temporary sibling and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::io(format!("{}: not a file path", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let io = |e: std::io::Error| CliError::io(format!("{}: {e}", path.display()));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(io)
}

impl RunManifest {
    pub fn new(seed: Option<u64>) -> Self {
        let now = now_unix();
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            seed,
            configs: BTreeMap::new(),
            created_unix: now,
            updated_unix: now,
            stages: BTreeMap::new(),
        }
    }

    /// Existing manifest in `dir`, or a fresh one.
    pub fn load_or_new(dir: &Path, seed: Option<u64>) -> CliResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(RunManifest::new(seed));
        }
        let text = crate::error::read_text(&path)?;
        let mut m: RunManifest =
            serde_json::from_str(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        if seed.is_some() {
            m.seed = seed;
        }
        Ok(m)
    }

    pub fn save(&mut self, dir: &Path) -> CliResult<()> {
        self.updated_unix = now_unix();
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    /// True when `stage` already ran on the same inputs and every output
    /// is still on disk with the recorded hash.
    pub fn is_current(&self, dir: &Path, stage: &str, inputs_sha256: &str) -> bool {
        let Some(rec) = self.stages.get(stage) else { return false };
        rec.status != StageStatus::Failed
            && rec.inputs_sha256 == inputs_sha256
            && !rec.outputs.is_empty()
            && rec.outputs.iter().all(|o| file_record(dir, &o.path).is_ok_and(|now| now == *o))
    }

    pub fn mark_skipped(&mut self, stage: &str) {
        if let Some(rec) = self.stages.get_mut(stage) {
            rec.status = StageStatus::Skipped;
            rec.finished_unix = now_unix();
        }
    }

    pub fn record(&mut self, dir: &Path, stage: &str, inputs_sha256: String, outputs: &[&str]) -> CliResult<()> {
        let outputs = outputs.iter().map(|name| file_record(dir, name)).collect::<CliResult<Vec<_>>>()?;
        self.stages.insert(
            stage.to_string(),
            StageRecord { status: StageStatus::Done, inputs_sha256, outputs, error: None, finished_unix: now_unix() },
        );
        Ok(())
    }

    pub fn record_failure(&mut self, stage: &str, inputs_sha256: String, error: &CliError) {
        self.stages.insert(
            stage.to_string(),
            StageRecord {
                status: StageStatus::Failed,
                inputs_sha256,
                outputs: Vec::new(),
                error: Some(error.to_string()),
                finished_unix: now_unix(),
            },
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn combined_hash_separates_parts() {
        assert_ne!(combined_hash(&[("a", b"bc")]), combined_hash(&[("ab", b"c")]));
        assert_ne!(combined_hash(&[("a", b"b"), ("c", b"")]), combined_hash(&[("a", b"bc")]));
    }

    #[test]
    fn stage_currency_tracks_outputs() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("out.txt"), b"one").unwrap();
        let mut m = RunManifest::new(Some(1));
        m.record(dir.path(), "s", "h".into(), &["out.txt"]).unwrap();
        assert!(m.is_current(dir.path(), "s", "h"));
        assert!(!m.is_current(dir.path(), "s", "other"));
        std::fs::write(dir.path().join("out.txt"), b"two").unwrap();
        assert!(!m.is_current(dir.path(), "s", "h"));
        m.save(dir.path()).unwrap();
        let back = RunManifest::load_or_new(dir.path(), None).unwrap();
        assert_eq!(back.stages, m.stages);
    }
}
