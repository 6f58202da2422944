//! Artifact writing: CSV dialect, JSON documents and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Quotes a CSV field when it contains a separator, quote or line break.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
    pub config_sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub scenario: String,
    pub config_origin: String,
    pub config_sha256: String,
    pub format: String,
    /// The scenario after defaults were filled in.
    pub inputs: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

/// Collects artifacts in an output directory and finishes with a manifest.
pub struct OutputDir {
    dir: PathBuf,
    config_sha256: String,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    /// Creates the directory and checks that it accepts files.
    pub fn create(dir: &Path, config_sha256: String) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let probe = dir.join(".crimedde-write-test");
        fs::write(&probe, b"").map_err(|e| CliError::io(dir, e))?;
        fs::remove_file(&probe).map_err(|e| CliError::io(&probe, e))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            config_sha256,
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.push(Artifact {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
            config_sha256: self.config_sha256.clone(),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::config(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    /// Writes `manifest.json` listing every artifact written so far.
    pub fn finish(self, mut manifest: Manifest) -> CliResult<Vec<Artifact>> {
        manifest.artifacts = self.artifacts.clone();
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::config(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(self.artifacts)
    }
}

/// A gnuplot script that plots the CSV columns against the first one.
pub fn gnuplot_stub(csv: &str, title: &str, columns: &[&str]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set xlabel 't'\n");
    let plots: Vec<String> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let file = if i == 0 { format!("'{csv}'") } else { "''".to_string() };
            format!("{file} using 1:{} with lines title '{c}'", i + 2)
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17);
        }
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn fields_are_quoted_when_needed() {
        assert_eq!(field("plain"), "plain");
        assert_eq!(field("a, b"), "\"a, b\"");
        assert_eq!(field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
