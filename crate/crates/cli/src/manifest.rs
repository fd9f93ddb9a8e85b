//! Output files and the run manifest that references them by content hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Config, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub kind: &'static str,
    pub command: String,
    pub version: &'static str,
    pub config: Config,
    pub seed: u64,
    pub threads: usize,
    pub started: String,
    pub finished: String,
    pub checks: Vec<CheckRecord>,
    pub files: Vec<FileRecord>,
    pub exit_code: u8,
}

/// Writes artifacts under one directory and records their hashes.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// `path` relative to the output directory, or `default` when absent.
    pub fn resolve(&self, path: Option<&Path>, default: &str) -> PathBuf {
        let p = path.unwrap_or(Path::new(default));
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, bytes)?;
        let digest = Sha256::digest(bytes);
        let mut sha256 = String::with_capacity(64);
        for b in digest {
            write!(sha256, "{b:02x}").unwrap();
        }
        self.files.push(FileRecord {
            path: path.display().to_string(),
            sha256,
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// JSON report with `schema_version` and `kind` prepended.
    pub fn write_json(&mut self, path: &Path, kind: &str, report: &impl Serialize) -> Result<(), CliError> {
        let mut map = serde_json::Map::new();
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
        map.insert("kind".into(), kind.into());
        match serde_json::to_value(report).map_err(|e| CliError::Usage(e.to_string()))? {
            serde_json::Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(map)).unwrap();
        text.push('\n');
        self.write(path, text.as_bytes())
    }

    /// CSV with a `# ising-currents schema_version=... kind=...` first line.
    pub fn write_csv(&mut self, path: &Path, kind: &str, header: &str, rows: &[String]) -> Result<(), CliError> {
        let mut text = format!("# ising-currents schema_version={SCHEMA_VERSION} kind={kind}\n{header}\n");
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        self.write(path, text.as_bytes())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn into_files(self) -> Vec<FileRecord> {
        self.files
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
