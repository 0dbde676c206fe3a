//! CSV output and the run manifest.
//!
//! Every experiment writes `<out>/<name>.csv` plus a single `manifest.json`
//! recording the resolved configuration, tool version, timestamps, per-file
//! SHA-256 checksums and the headline fit results. CSV bytes are a pure
//! function of the configuration (floats are printed with the shortest
//! round-trip representation), so identical configs reproduce identical
//! files; the manifest timestamps are the only thing that moves.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
    pub rows: usize,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub created_utc: String,
    pub finished_utc: String,
    pub seed: u64,
    pub threads: usize,
    pub config: ExperimentConfig,
    pub outputs: Vec<FileRecord>,
    pub notes: Vec<String>,
    pub results: serde_json::Map<String, serde_json::Value>,
}

/// Collects CSV files and summary results for one run, then writes the
/// manifest exactly once.
pub struct OutputWriter {
    dir: PathBuf,
    created: String,
    outputs: Vec<FileRecord>,
    notes: Vec<String>,
    results: serde_json::Map<String, serde_json::Value>,
}

impl OutputWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            created: now_utc(),
            outputs: Vec::new(),
            notes: Vec::new(),
            results: serde_json::Map::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write one CSV file (header plus data rows) and record its checksum.
    pub fn write_csv<I>(&mut self, name: &str, header: &str, rows: I) -> Result<()>
    where
        I: IntoIterator<Item = String>,
    {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        let mut count = 0usize;
        for row in rows {
            buf.push_str(&row);
            buf.push('\n');
            count += 1;
        }
        let path = self.dir.join(format!("{name}.csv"));
        std::fs::write(&path, buf.as_bytes())?;
        let mut hasher = Sha256::new();
        hasher.update(buf.as_bytes());
        self.outputs.push(FileRecord {
            file: format!("{name}.csv"),
            sha256: hex_digest(&hasher.finalize()),
            bytes: buf.len() as u64,
            rows: count,
        });
        Ok(())
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn record<T: Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        let v = serde_json::to_value(value)
            .map_err(|e| Error::Config(format!("cannot serialize result '{key}': {e}")))?;
        self.results.insert(key.to_string(), v);
        Ok(())
    }

    /// Write `manifest.json`; consumes the writer so it happens exactly once.
    pub fn finish(self, cfg: &ExperimentConfig, threads: usize) -> Result<PathBuf> {
        let manifest = RunManifest {
            tool: "linres",
            version: env!("CARGO_PKG_VERSION"),
            created_utc: self.created,
            finished_utc: now_utc(),
            seed: cfg.seed,
            threads,
            config: cfg.clone(),
            outputs: self.outputs,
            notes: self.notes,
            results: self.results,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

fn now_utc() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_manifest_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let mut w = OutputWriter::create(tmp.path()).unwrap();
        w.write_csv("demo", "a,b", vec!["1,2".to_string(), "3,4".to_string()])
            .unwrap();
        w.note("hello");
        w.record("answer", &42).unwrap();
        let cfg = ExperimentConfig::default();
        let path = w.finish(&cfg, 1).unwrap();

        let text = std::fs::read_to_string(tmp.path().join("demo.csv")).unwrap();
        assert_eq!(text, "a,b\n1,2\n3,4\n");

        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(manifest["outputs"][0]["rows"], 2);
        assert_eq!(manifest["results"]["answer"], 42);
        assert_eq!(manifest["tool"], "linres");
        // recorded checksum matches the bytes on disk
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        assert_eq!(
            manifest["outputs"][0]["sha256"],
            serde_json::Value::String(hex_digest(&hasher.finalize()))
        );
    }
}
