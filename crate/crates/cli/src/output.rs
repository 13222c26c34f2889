//! Artifact writers: JSON/JSONL/CSV with frozen formatting, and the run
//! manifest with per-file checksums.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Collects artifacts for one run and writes the manifest last.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, String, u64)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>();
        self.files.push((name.to_string(), digest, bytes.len() as u64));
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.record(name, bytes);
        Ok(())
    }

    /// Pretty JSON with a trailing newline.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// One compact JSON object per line.
    pub fn write_jsonl<T: Serialize>(&mut self, name: &str, rows: &[T]) -> anyhow::Result<()> {
        let mut text = String::new();
        for row in rows {
            text.push_str(&serde_json::to_string(row)?);
            text.push('\n');
        }
        self.write_bytes(name, text.as_bytes())
    }

    /// RFC 4180 CSV, LF line endings, `.` decimal point, shortest
    /// round-trip float formatting; the header fixes the column order.
    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> anyhow::Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(row)?;
        }
        let bytes = writer.into_inner()?;
        self.write_bytes(name, &bytes)
    }

    /// Write `manifest.json` (atomically, last) and return the recorded
    /// file list.
    pub fn finish(
        mut self,
        config_hash: &str,
        started_unix: u64,
        finished_unix: u64,
    ) -> anyhow::Result<Manifest> {
        self.files.sort();
        let manifest = Manifest {
            config_hash: config_hash.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix,
            finished_unix,
            files: self
                .files
                .iter()
                .map(|(name, sha256, bytes)| ManifestFile {
                    name: name.clone(),
                    sha256: sha256.clone(),
                    bytes: *bytes,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let tmp = self.dir.join("manifest.json.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.dir.join("manifest.json"))?;
        Ok(manifest)
    }
}

/// The run manifest: everything needed to check a reproduction.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub code_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub files: Vec<ManifestFile>,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct ManifestFile {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// SHA-256 of the canonical (serde-ordered) config serialization.
pub fn config_hash<T: Serialize>(config: &T) -> anyhow::Result<String> {
    let bytes = serde_json::to_vec(config)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
