//! Run manifests: inputs, parameters, seed, version and output hashes.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileRecord {
    fn of(path: &Path, data: &[u8]) -> Self {
        FileRecord {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(data)),
            bytes: data.len() as u64,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub params: Value,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub results: Value,
    /// Seconds since the Unix epoch, or `SOURCE_DATE_EPOCH` when set.
    pub timestamp: u64,
}

/// Tracks what a command reads and writes.
pub struct Run {
    command: &'static str,
    seed: u64,
    params: Value,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
    input_paths: Vec<PathBuf>,
    pub results: Value,
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

impl Run {
    pub fn new(command: &'static str, seed: u64, params: &impl Serialize) -> Result<Self> {
        Ok(Run {
            command,
            seed,
            params: serde_json::to_value(params)?,
            inputs: Vec::new(),
            outputs: Vec::new(),
            input_paths: Vec::new(),
            results: Value::Null,
        })
    }

    /// Reads an input file, recording its hash.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let data = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(FileRecord::of(path, &data));
        self.input_paths.push(path.to_path_buf());
        Ok(data)
    }

    /// Checks that every planned output can be written and would not
    /// overwrite an input. Call before any computation.
    pub fn check_outputs(&self, outputs: &[&Path]) -> Result<()> {
        for out in outputs {
            let parent = match out.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            if !parent.is_dir() {
                bail!("output directory {} does not exist", parent.display());
            }
            if out.is_dir() {
                bail!("output path {} is a directory", out.display());
            }
            if self.input_paths.iter().any(|i| same_file(i, out)) {
                bail!("output {} would overwrite an input", out.display());
            }
        }
        Ok(())
    }

    pub fn write(&mut self, path: &Path, data: &[u8]) -> Result<()> {
        std::fs::write(path, data).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(FileRecord::of(path, data));
        Ok(())
    }

    pub fn finish(self, manifest_path: &Path) -> Result<()> {
        let timestamp = match std::env::var("SOURCE_DATE_EPOCH") {
            Ok(v) => v.parse().context("SOURCE_DATE_EPOCH must be an integer")?,
            Err(_) => std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let manifest = Manifest {
            tool: "luxprobe",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.seed,
            params: self.params,
            inputs: self.inputs,
            outputs: self.outputs,
            results: self.results,
            timestamp,
        };
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        std::fs::write(manifest_path, text)
            .with_context(|| format!("writing {}", manifest_path.display()))?;
        Ok(())
    }
}

/// `<path>.manifest.json`
pub fn beside(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    s.into()
}
