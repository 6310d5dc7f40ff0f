use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

/// One row of long-format plot data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub x: f64,
    pub series: String,
    pub value: f64,
    pub error: f64,
}

impl PlotRow {
    pub fn new(x: impl Into<f64>, series: &str, value: f64, error: f64) -> Self {
        PlotRow {
            x: x.into(),
            series: series.to_string(),
            value,
            error,
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: String,
    seed: u64,
    threads: usize,
    versions: Versions,
    files: &'a [String],
    /// Wall-clock time of the run; the only field that differs on replay.
    timestamp_unix: u64,
}

#[derive(Debug, Serialize)]
struct Versions {
    apriesz_core: &'static str,
    apriesz_cli: &'static str,
}

/// Result directory; every file lands via a rename from a temporary file in
/// the same directory.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        let mut tmp = NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.dir.join(name)).map_err(|e| e.error)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(io::Error::other)?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_plot(&mut self, rows: &[PlotRow]) -> io::Result<()> {
        self.write_rows("plot.csv", rows)
    }

    pub fn write_manifest(&mut self, command: &str, config_text: &str, seed: u64, threads: usize) -> io::Result<()> {
        let mut files = self.written.clone();
        files.push("manifest.json".into());
        let manifest = Manifest {
            command,
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            threads,
            versions: Versions {
                apriesz_core: apriesz_core::VERSION,
                apriesz_cli: env!("CARGO_PKG_VERSION"),
            },
            files: &files,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        self.write_json("manifest.json", &manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn writes_replace_existing_files() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("r");
        let mut out = OutputDir::create(&dir).unwrap();
        out.write_bytes("a.txt", b"one").unwrap();
        out.write_bytes("a.txt", b"two").unwrap();
        assert_eq!(fs::read_to_string(dir.join("a.txt")).unwrap(), "two");
        let names: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn plot_csv_is_long_format() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(tmp.path()).unwrap();
        out.write_plot(&[PlotRow::new(1u32, "i_k", 0.5, 0.01)]).unwrap();
        let text = fs::read_to_string(tmp.path().join("plot.csv")).unwrap();
        assert_eq!(text, "x,series,value,error\n1.0,i_k,0.5,0.01\n");
    }
}
