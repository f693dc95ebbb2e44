//! Artifact files and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Version of the manifest layout.
pub const MANIFEST_VERSION: u32 = 1;

/// Fixed 17-significant-digit rendering used for every float in CSV output.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Outcome of one check. Only gated checks decide the exit status.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub gated: bool,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    /// Gated check that passes when `value <= threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            gated: true,
            passed: value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    /// Gated check that passes when `value >= threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            gated: true,
            passed: value >= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    /// The same check, recorded but not gating.
    pub fn report_only(mut self) -> Self {
        self.gated = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub scenario: String,
    pub scenario_sha256: String,
    pub command: String,
    pub versions: BTreeMap<String, String>,
    pub seed: u64,
    pub outputs: Vec<OutputEntry>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Manifest {
    pub fn new(scenario: &str, scenario_text: &str, command: &str, seed: u64, outputs: Vec<OutputEntry>, checks: Vec<Check>) -> Self {
        let versions = BTreeMap::from([
            ("hbdm-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("hbdm-core".to_string(), hbdm_core::VERSION.to_string()),
        ]);
        let passed = checks.iter().filter(|c| c.gated).all(|c| c.passed);
        Self {
            manifest_version: MANIFEST_VERSION,
            scenario: scenario.into(),
            scenario_sha256: sha256_hex(scenario_text.as_bytes()),
            command: command.into(),
            versions,
            seed,
            outputs,
            checks,
            passed,
        }
    }
}

/// Writes artifacts into one directory and records their digests.
pub struct ArtifactWriter {
    dir: PathBuf,
    outputs: Vec<OutputEntry>,
}

impl ArtifactWriter {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, &bytes).map_err(|source| CliError::Output { path, source })?;
        self.outputs.push(OutputEntry {
            path: name.into(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn csv<I, R>(&mut self, name: &str, header: &[String], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let io = |e: csv::Error| CliError::Output {
            path: self.dir.join(name),
            source: e.into(),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output {
            path: self.dir.join(name),
            source: e.into_error(),
        })?;
        self.write(name, bytes)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("artifacts serialize");
        bytes.push(b'\n');
        self.write(name, bytes)
    }

    pub fn finish(self) -> Vec<OutputEntry> {
        self.outputs
    }
}

/// Writes the manifest next to the artifacts it lists.
pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf, CliError> {
    let path = dir.join("manifest.json");
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    std::fs::write(&path, bytes).map_err(|source| CliError::Output {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
