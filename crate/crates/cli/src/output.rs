use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliError;

/// 17 significant digits, enough to roundtrip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory CSV whose first line records the producing command and the
/// config hash.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(command: &str, config_hash: &str, header: &[&str]) -> Self {
        let mut text = format!("# semdex {command} config_hash={config_hash}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: &'a PipelineConfig,
    pub outputs: Vec<OutputRecord>,
    pub summary: serde_json::Value,
}

/// Collects the files a command writes and emits its manifest.
pub struct Run<'a> {
    pub command: &'a str,
    pub config: &'a PipelineConfig,
    pub hash: String,
    outputs: Vec<OutputRecord>,
}

impl<'a> Run<'a> {
    pub fn new(command: &'a str, config: &'a PipelineConfig) -> Self {
        Run {
            command,
            config,
            hash: config.hash(),
            outputs: Vec::new(),
        }
    }

    pub fn csv(&self, header: &[&str]) -> Csv {
        Csv::new(self.command, &self.hash, header)
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        write_file(path, bytes)?;
        self.record(path, bytes);
        Ok(())
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(OutputRecord {
            path: self.display_path(path),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
    }

    fn display_path(&self, path: &Path) -> String {
        let rel = path.strip_prefix(&self.config.root).unwrap_or(path);
        rel.to_string_lossy().replace('\\', "/")
    }

    pub fn finish(self, summary: serde_json::Value) -> Result<PathBuf, CliError> {
        let path = self
            .config
            .resolve(&self.config.output_dir)
            .join(format!("manifest_{}.json", self.command.replace('-', "_")));
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            config_hash: self.hash,
            config: self.config,
            outputs: self.outputs,
            summary,
        };
        let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        json.push(b'\n');
        write_file(&path, &json)?;
        Ok(path)
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("cannot create directory {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_roundtrip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 123456.789, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_header_carries_hash() {
        let mut csv = Csv::new("topic", "abc", &["name", "year"]);
        csv.row(&["health".into(), "1995".into()]);
        let text = String::from_utf8(csv.into_bytes()).unwrap();
        assert_eq!(text, "# semdex topic config_hash=abc\nname,year\nhealth,1995\n");
    }
}
