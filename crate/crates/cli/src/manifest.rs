//! Run bookkeeping: hashed inputs, written outputs and the manifest file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Kind};

#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    /// Values chosen at run time, such as an automatic bucket width.
    pub resolved: BTreeMap<String, Value>,
    /// SHA-256 of every input file, keyed by path.
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    /// Start of the run in seconds since the Unix epoch.
    pub started: f64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
}

/// Tracks one command invocation.
pub struct Run {
    subcommand: String,
    parameters: Value,
    resolved: BTreeMap<String, Value>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<PathBuf>,
    started: SystemTime,
    clock: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Run {
    pub fn new(subcommand: &str, parameters: impl Serialize) -> Self {
        Run {
            subcommand: subcommand.into(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            resolved: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn resolve(&mut self, key: &str, value: impl Serialize) {
        self.resolved.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    /// Reads and hashes an input file.
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|_| CliError::invalid(format!("{} is not UTF-8", path.display())))
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        fs::write(path, contents)
            .map_err(|e| CliError::new(Kind::Io, format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn write_json(&mut self, path: &Path, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("output serializes");
        text.push('\n');
        self.write(path, &text)
    }

    pub fn has_outputs(&self) -> bool {
        !self.outputs.is_empty()
    }

    /// Default manifest location: next to the first output.
    pub fn default_manifest_path(&self) -> PathBuf {
        let dir = self.outputs.first().and_then(|p| p.parent()).unwrap_or(Path::new(""));
        dir.join(format!("ossp-{}.manifest.json", self.subcommand))
    }

    pub fn finish(self, path: &Path) -> Result<(), CliError> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            parameters: self.parameters,
            resolved: self.resolved,
            inputs: self.inputs,
            version: env!("CARGO_PKG_VERSION").into(),
            started: self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            wall_clock_seconds: self.clock.elapsed().as_secs_f64(),
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        fs::write(path, text).map_err(|e| CliError::new(Kind::Io, format!("cannot write {}: {e}", path.display())))
    }
}
