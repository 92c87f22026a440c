//! File formats: `series.csv`, `sweep.csv`, `summary.json`, `manifest.json`.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`, so every file is a deterministic function of the manifest.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::CliError;

/// Version of the file layouts documented in `docs/schemas.md`.
pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "kuramoto";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SERIES_FILE: &str = "series.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

pub const SERIES_HEADER: [&str; 7] = ["t", "R", "phi", "U", "mean_phase", "H", "entropy_change"];
pub const SWEEP_HEADER: [&str; 6] = ["K", "R", "phi", "class", "stop", "t_final"];

/// Shortest round-trip decimal; exponent form outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// One line of `series.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub r: f64,
    pub phi: Option<f64>,
    pub u: f64,
    pub mean_phase: f64,
    pub h: f64,
    /// Only kinetic runs carry the entropy change.
    pub entropy_change: Option<f64>,
}

impl SeriesRow {
    pub fn cells(&self) -> [String; 7] {
        [
            fmt_f64(self.t),
            fmt_f64(self.r),
            fmt_opt(self.phi),
            fmt_f64(self.u),
            fmt_f64(self.mean_phase),
            fmt_f64(self.h),
            fmt_opt(self.entropy_change),
        ]
    }
}

/// One line of `sweep.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: f64,
    pub r: f64,
    pub phi: Option<f64>,
    pub class: String,
    pub stop: String,
    pub t_final: f64,
}

impl SweepRow {
    pub fn cells(&self) -> [String; 6] {
        [
            fmt_f64(self.k),
            fmt_f64(self.r),
            fmt_opt(self.phi),
            self.class.clone(),
            self.stop.clone(),
            fmt_f64(self.t_final),
        ]
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Renders a header and rows exactly as they are written to disk.
pub fn csv_bytes<const W: usize>(header: [&str; W], rows: impl Iterator<Item = [String; W]>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_csv<const W: usize>(
    path: &Path,
    header: [&str; W],
    rows: impl Iterator<Item = [String; W]>,
) -> Result<(), CliError> {
    fs::write(path, csv_bytes(header, rows)).map_err(|e| io_err(path, e))
}

pub fn write_json(path: &Path, doc: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}
