//! Run manifests: what went in, what came out, and every fitted constant.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{sha256_hex, write_json};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const FORMAT_VERSION: u32 = 1;

/// A fitted constant and the residual of the fit that produced it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Fitted {
    pub value: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub wavemap: &'static str,
    pub format: u32,
    pub os: &'static str,
    pub arch: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            wavemap: env!("CARGO_PKG_VERSION"),
            format: FORMAT_VERSION,
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub inputs_hash: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub versions: Versions,
    pub wall_seconds: f64,
    pub fits: BTreeMap<String, Fitted>,
    pub results: serde_json::Value,
    /// Set when a run stopped before its requested end.
    pub truncated: bool,
    pub files: Vec<FileRecord>,
}

/// Files written by one pipeline into one directory.
#[derive(Debug)]
pub struct Artifacts {
    pub dir: PathBuf,
    names: Vec<PathBuf>,
    pub fits: BTreeMap<String, Fitted>,
    pub truncated: bool,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            names: Vec::new(),
            fits: BTreeMap::new(),
            truncated: false,
        })
    }

    /// Path for a new file, recorded for the manifest.
    pub fn file(&mut self, name: impl Into<PathBuf>) -> PathBuf {
        let name = name.into();
        let path = self.dir.join(&name);
        self.names.push(name);
        path
    }

    pub fn fit(&mut self, name: impl Into<String>, value: f64, residual: f64) {
        self.fits.insert(name.into(), Fitted { value, residual });
    }

    pub fn file_names(&self) -> &[PathBuf] {
        &self.names
    }

    /// Hash every recorded file and write the manifest beside them.
    pub fn finish(
        self,
        command: &str,
        inputs_hash: &str,
        seed: u64,
        config: serde_json::Value,
        results: serde_json::Value,
        wall_seconds: f64,
    ) -> Result<PathBuf> {
        let mut files = Vec::with_capacity(self.names.len());
        for name in &self.names {
            let path = self.dir.join(name);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            files.push(FileRecord {
                path: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        let manifest = Manifest {
            command: command.to_owned(),
            inputs_hash: inputs_hash.to_owned(),
            seed,
            config,
            versions: Versions::default(),
            wall_seconds,
            fits: self.fits,
            results,
            truncated: self.truncated,
            files,
        };
        let path = self.dir.join(MANIFEST_NAME);
        write_json(&path, &manifest)?;
        Ok(path)
    }
}
