use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::Failure;

pub const MANIFEST: &str = "manifest.json";

/// Output directory of one run. Every file starts with the config hash and
/// is listed, with its digest, in the manifest.
pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    seed: u64,
    config: Value,
    experiment: &'static str,
    files: Vec<String>,
}

impl Artifacts {
    pub fn create(cfg: &ExperimentConfig) -> Result<Self, Failure> {
        std::fs::create_dir_all(&cfg.out).map_err(io)?;
        let a = Artifacts {
            dir: cfg.out.clone(),
            hash: cfg.hash(),
            seed: cfg.seed,
            config: serde_json::to_value(cfg).map_err(|e| Failure::Numeric(e.to_string()))?,
            experiment: cfg.experiment.name(),
            files: Vec::new(),
        };
        a.write_manifest("running", None, &Value::Null)?;
        Ok(a)
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn header_line(&self) -> String {
        format!("# config_hash={} seed={}", self.hash, self.seed)
    }

    /// CSV whose rows are flushed as they arrive, so an interrupted run keeps
    /// what it computed.
    pub fn csv(&mut self, name: &str, columns: &[&str]) -> Result<CsvSink, Failure> {
        let path = self.path(name);
        let mut file = File::create(&path).map_err(io)?;
        writeln!(file, "{}", self.header_line()).map_err(io)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(columns).map_err(csv_err)?;
        w.flush().map_err(io)?;
        self.files.push(name.to_string());
        Ok(CsvSink { w, width: columns.len() })
    }

    pub fn write_text(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        std::fs::write(self.path(name), body).map_err(io)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(&self, status: &str, error: Option<&str>, summary: &Value) -> Result<(), Failure> {
        self.write_manifest(status, error, summary)
    }

    fn write_manifest(&self, status: &str, error: Option<&str>, summary: &Value) -> Result<(), Failure> {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|f| {
                let digest =
                    std::fs::read(self.path(f)).map(|b| format!("{:x}", Sha256::digest(&b))).unwrap_or_default();
                json!({ "name": f, "sha256": digest })
            })
            .collect();
        let manifest = json!({
            "experiment": self.experiment,
            "config_hash": self.hash,
            "seed": self.seed,
            "config": self.config,
            "status": status,
            "error": error,
            "files": files,
            "summary": summary,
        });
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Numeric(e.to_string()))?;
        std::fs::write(self.path(MANIFEST), text + "\n").map_err(io)
    }
}

pub struct CsvSink {
    w: csv::Writer<File>,
    width: usize,
}

impl CsvSink {
    pub fn row(&mut self, fields: &[Cell]) -> Result<(), Failure> {
        debug_assert_eq!(fields.len(), self.width);
        let rec: Vec<String> = fields.iter().map(Cell::render).collect();
        self.w.write_record(&rec).map_err(csv_err)?;
        self.w.flush().map_err(io)
    }
}

/// One CSV field.
#[derive(Debug, Clone, Serialize)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::F)
    }
}

/// Shortest round-trip form, in exponent notation away from unit scale.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Io(e.to_string())
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Numeric(format!("csv: {e}"))
}
