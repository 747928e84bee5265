//! Run bookkeeping: every CSV gets a parameter header pointing at
//! `manifest.json`, which records the resolved configuration and diagnostics.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use qnmres::table::Table;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Config, Resolved};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub timestamp_unix: u64,
    pub config: Config,
    pub resolved: Resolved,
    pub diagnostics: serde_json::Map<String, Value>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
}

pub struct Run {
    dir: PathBuf,
    pub manifest: Manifest,
    header: Vec<String>,
}

impl Run {
    pub fn new(dir: &Path, command: &'static str, config: &Config, resolved: &Resolved) -> Self {
        let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let header = vec![
            format!("{} {} {command}; manifest: manifest.json", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            format!("config: {}", serde_json::to_string(config).expect("config serializes")),
            format!("resolved: {}", serde_json::to_string(resolved).expect("parameters serialize")),
        ];
        Self {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                tool: "qnmres",
                version: env!("CARGO_PKG_VERSION"),
                command,
                timestamp_unix,
                config: config.clone(),
                resolved: resolved.clone(),
                diagnostics: serde_json::Map::new(),
                warnings: resolved.warnings.clone(),
                outputs: Vec::new(),
            },
            header,
        }
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Serialize) {
        self.manifest.diagnostics.insert(key.to_string(), serde_json::to_value(value).expect("diagnostic serializes"));
    }

    pub fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.manifest.warnings.push(message);
    }

    /// Write `table` with the run header prepended to its own comments.
    pub fn write_csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let mut t = table.clone();
        t.comments = self.header.iter().cloned().chain(table.comments.iter().cloned()).collect();
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        t.write_csv(BufWriter::new(file))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), value)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    /// Write `summary.json` (the diagnostics) and `manifest.json`.
    pub fn finish(mut self) -> Result<()> {
        let summary = Value::Object(self.manifest.diagnostics.clone());
        self.write_json("summary.json", &summary)?;
        let path = self.dir.join("manifest.json");
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &self.manifest)?;
        Ok(())
    }
}
