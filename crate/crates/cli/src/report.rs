//! Output directory handling and the JSON report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use eigenshape::matrix_io::{csv_string, spmx_bytes};
use eigenshape::mesh::{write_off, Mesh};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::args::MatrixFormat;
use crate::error::CliError;

pub const TIMINGS_FILE: &str = "timings.json";
pub const REPORT_FILE: &str = "report.json";

/// Numbers formatted the way the matrix writers format them.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Collects result files and wall-clock phases for one run.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
    timings: BTreeMap<String, f64>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            timings: BTreeMap::new(),
        })
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    /// Writes `stem.csv` or `stem.spmx`; returns the file name.
    pub fn matrix(&mut self, stem: &str, m: &DMatrix<f64>, format: MatrixFormat) -> Result<String, CliError> {
        let name = format!("{stem}.{}", format.extension());
        let bytes = match format {
            MatrixFormat::Csv => csv_string(m, None)?.into_bytes(),
            MatrixFormat::Spmx => spmx_bytes(m)?,
        };
        self.write_bytes(&name, &bytes)?;
        Ok(name)
    }

    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let failed = |e: csv::Error| CliError::Usage(format!("cannot format {name}: {e}"));
        writer.write_record(header).map_err(failed)?;
        for row in rows {
            writer.write_record(row).map_err(failed)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Usage(format!("cannot format {name}: {e}")))?;
        self.write_bytes(name, &bytes)
    }

    pub fn off(&mut self, name: &str, mesh: &Mesh) -> Result<(), CliError> {
        self.write_bytes(name, write_off(mesh).as_bytes())
    }

    /// Runs `f` and records its wall time under `phase`.
    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let value = f();
        *self.timings.entry(phase.to_string()).or_default() += start.elapsed().as_secs_f64();
        value
    }

    /// Writes the timings sidecar and the report. Timings never enter the
    /// report, which keeps it byte-identical across runs.
    pub fn finish(mut self, report: &Value, total_seconds: f64) -> Result<(), CliError> {
        self.timings.insert("total".to_string(), total_seconds);
        let timings = serde_json::to_string_pretty(&json!({ "seconds": self.timings })).expect("timings serialize");
        self.write_bytes(TIMINGS_FILE, format!("{timings}\n").as_bytes())?;
        let text = serde_json::to_string_pretty(report).expect("report serializes");
        self.write_bytes(REPORT_FILE, format!("{text}\n").as_bytes())
    }
}

pub fn report(command: &str, config: Value, outcome: &Result<Value, CliError>, outputs: &[String]) -> Value {
    let (status, result, error) = match outcome {
        Ok(result) => ("ok", result.clone(), Value::Null),
        Err(e) => (
            "error",
            Value::Null,
            json!({ "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() }),
        ),
    };
    let mut outputs: Vec<&str> = outputs
        .iter()
        .map(String::as_str)
        .filter(|f| *f != REPORT_FILE && *f != TIMINGS_FILE)
        .collect();
    outputs.sort_unstable();
    json!({
        "tool": "eigenshape",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "status": status,
        "result": result,
        "error": error,
        "outputs": outputs,
        "timings_file": TIMINGS_FILE,
    })
}
