//! Run manifest and the output directory that feeds its file inventory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{Failure, InModule, Result};

pub const MANIFEST_FORMAT: &str = "khps-manifest-1";
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub module: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentLink {
    /// Parent output directory as given on the command line, or relative
    /// to this run's directory for recipe-internal restarts.
    pub directory: String,
    pub manifest_sha256: String,
    pub snapshot: String,
    pub snapshot_sha256: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: String,
    pub command: String,
    pub recipe: Option<String>,
    /// `complete`, or `incomplete` when a stage failed.
    pub status: String,
    pub failure: Option<FailureRecord>,
    pub config: BTreeMap<String, String>,
    pub parent: Option<ParentLink>,
    pub derived: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, Value>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn new(command: &str, recipe: Option<&str>, config: &Config) -> Self {
        Self {
            format: MANIFEST_FORMAT.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            recipe: recipe.map(String::from),
            status: "incomplete".into(),
            failure: None,
            config: config.entries().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            parent: None,
            derived: BTreeMap::new(),
            residuals: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    pub fn derive(&mut self, key: &str, value: impl Into<Value>) {
        self.derived.insert(key.into(), value.into());
    }

    pub fn residual(&mut self, key: &str, value: impl Into<Value>) {
        self.residuals.insert(key.into(), value.into());
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text).in_module("io")?;
        if m.format != MANIFEST_FORMAT {
            return Err(Failure::new(
                "io",
                format!("{}: unknown manifest format `{}`", path.display(), m.format),
            ));
        }
        Ok(m)
    }

    pub fn file(&self, path: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.path == path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Failure::new("io", format!("{}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Output directory that records every file written through it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: BTreeMap<String, FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Failure::new("io", format!("{}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Failure::new("io", format!("{}: {e}", dir.display())))?;
        }
        write_atomic(&path, bytes)?;
        self.files.insert(
            name.to_string(),
            FileEntry {
                path: name.to_string(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            },
        );
        Ok(())
    }

    /// Adds a file written by a nested run, named relative to this root.
    pub fn adopt(&mut self, entry: FileEntry) {
        self.files.insert(entry.path.clone(), entry);
    }

    pub fn entries(&self) -> Vec<FileEntry> {
        self.files.values().cloned().collect()
    }

    /// Fills the inventory and writes `manifest.json` last.
    pub fn finish(&self, manifest: &mut Manifest) -> Result<()> {
        manifest.files = self.entries();
        let mut text = serde_json::to_string_pretty(manifest).in_module("io")?;
        text.push('\n');
        write_atomic(&self.path(MANIFEST_NAME), text.as_bytes())
    }
}
