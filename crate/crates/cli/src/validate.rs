//! Schema checks for an output directory.
//!
//! Besides field-level checks, every CSV file is parsed into typed rows and
//! re-rendered; the bytes must match the file exactly.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::config::{Mode, RunConfig};
use crate::output::{
    csv_bytes, SeriesRow, SweepRow, MANIFEST_FILE, SCHEMA_VERSION, SERIES_FILE, SERIES_HEADER, SUMMARY_FILE,
    SWEEP_FILE, SWEEP_HEADER, TOOL_NAME,
};

const CLASS_LABELS: [&str; 3] = ["incoherent", "clustered", "not_stationary"];
const STOP_LABELS: [&str; 2] = ["stationary", "horizon"];

/// Outcome of [`validate_dir`]: the files that were checked, or every
/// problem found.
pub type Report = Result<Vec<String>, Vec<String>>;

type TableCheck = fn(&Path) -> Result<usize, Vec<String>>;

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn check_manifest(doc: &Value, errs: &mut Vec<String>) -> Option<Mode> {
    let f = MANIFEST_FILE;
    if doc.get("schema_version").and_then(Value::as_u64) != Some(SCHEMA_VERSION as u64) {
        errs.push(format!("{f}: schema_version must be {SCHEMA_VERSION}"));
    }
    if doc.get("tool").and_then(Value::as_str) != Some(TOOL_NAME) {
        errs.push(format!("{f}: tool must be \"{TOOL_NAME}\""));
    }
    if doc.get("tool_version").and_then(Value::as_str).is_none() {
        errs.push(format!("{f}: tool_version missing"));
    }
    let seed = doc.get("seed").and_then(Value::as_u64);
    if seed.is_none() {
        errs.push(format!("{f}: seed must be an unsigned integer"));
    }
    let cfg = match doc.get("config").cloned().map(RunConfig::from_value) {
        Some(Ok(c)) => c,
        Some(Err(e)) => {
            errs.push(format!("{f}: config does not parse: {e}"));
            return None;
        }
        None => {
            errs.push(format!("{f}: config missing"));
            return None;
        }
    };
    if let Err(e) = cfg.validate() {
        errs.push(format!("{f}: config invalid: {e}"));
    }
    let mode = cfg.run.mode;
    if doc.get("mode").and_then(Value::as_str) != mode.map(|m| m.as_str()) {
        errs.push(format!("{f}: mode disagrees with config.run.mode"));
    }
    if seed.is_some() && seed != Some(cfg.run.seed) {
        errs.push(format!("{f}: seed disagrees with config.run.seed"));
    }
    mode
}

fn parse_num(cell: &str, name: &str, line: usize, errs: &mut Vec<String>) -> f64 {
    match cell.parse::<f64>() {
        Ok(x) if x.is_finite() => x,
        _ => {
            errs.push(format!("line {line}: column {name} is not a finite number: `{cell}`"));
            f64::NAN
        }
    }
}

fn parse_opt(cell: &str, name: &str, line: usize, errs: &mut Vec<String>) -> Option<f64> {
    (!cell.is_empty()).then(|| parse_num(cell, name, line, errs))
}

fn read_records(path: &Path, header: &[&str], errs: &mut Vec<String>) -> Option<(Vec<u8>, Vec<csv::StringRecord>)> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            errs.push(format!("{}: {e}", path.display()));
            return None;
        }
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes.as_slice());
    match rdr.headers() {
        Ok(h) if h.iter().eq(header.iter().copied()) => {}
        Ok(h) => {
            errs.push(format!(
                "{}: header is `{}`, expected `{}`",
                path.display(),
                h.iter().collect::<Vec<_>>().join(","),
                header.join(",")
            ));
            return None;
        }
        Err(e) => {
            errs.push(format!("{}: {e}", path.display()));
            return None;
        }
    }
    let mut records = Vec::new();
    for r in rdr.records() {
        match r {
            Ok(r) => records.push(r),
            Err(e) => {
                errs.push(format!("{}: {e}", path.display()));
                return None;
            }
        }
    }
    Some((bytes, records))
}

pub fn check_series(path: &Path) -> Result<usize, Vec<String>> {
    let mut errs = Vec::new();
    let Some((bytes, records)) = read_records(path, &SERIES_HEADER, &mut errs) else {
        return Err(errs);
    };
    if records.is_empty() {
        errs.push(format!("{SERIES_FILE}: no rows"));
    }
    let mut rows = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let line = i + 2;
        let row = SeriesRow {
            t: parse_num(&r[0], "t", line, &mut errs),
            r: parse_num(&r[1], "R", line, &mut errs),
            phi: parse_opt(&r[2], "phi", line, &mut errs),
            u: parse_num(&r[3], "U", line, &mut errs),
            mean_phase: parse_num(&r[4], "mean_phase", line, &mut errs),
            h: parse_num(&r[5], "H", line, &mut errs),
            entropy_change: parse_opt(&r[6], "entropy_change", line, &mut errs),
        };
        if !(0.0..=1.0 + 1e-12).contains(&row.r) {
            errs.push(format!("line {line}: R = {} outside [0, 1]", row.r));
        }
        if let Some(phi) = row.phi {
            if !(-PI..=PI).contains(&phi) {
                errs.push(format!("line {line}: phi = {phi} outside [-pi, pi]"));
            }
        }
        if let Some(prev) = rows.last() {
            let prev: &SeriesRow = prev;
            if !(row.t > prev.t) {
                errs.push(format!("line {line}: time {} does not increase", row.t));
            }
            if prev.entropy_change.is_some() != row.entropy_change.is_some() {
                errs.push(format!("line {line}: entropy_change is filled on some rows only"));
            }
        }
        rows.push(row);
    }
    if errs.is_empty() && csv_bytes(SERIES_HEADER, rows.iter().map(SeriesRow::cells)) != bytes {
        errs.push(format!("{SERIES_FILE}: re-rendered rows differ from the file"));
    }
    if errs.is_empty() {
        Ok(rows.len())
    } else {
        Err(errs)
    }
}

pub fn check_sweep(path: &Path) -> Result<usize, Vec<String>> {
    let mut errs = Vec::new();
    let Some((bytes, records)) = read_records(path, &SWEEP_HEADER, &mut errs) else {
        return Err(errs);
    };
    let mut rows: Vec<SweepRow> = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let line = i + 2;
        let row = SweepRow {
            k: parse_num(&r[0], "K", line, &mut errs),
            r: parse_num(&r[1], "R", line, &mut errs),
            phi: parse_opt(&r[2], "phi", line, &mut errs),
            class: r[3].to_string(),
            stop: r[4].to_string(),
            t_final: parse_num(&r[5], "t_final", line, &mut errs),
        };
        if !CLASS_LABELS.contains(&row.class.as_str()) {
            errs.push(format!("line {line}: unknown class `{}`", row.class));
        }
        if !STOP_LABELS.contains(&row.stop.as_str()) {
            errs.push(format!("line {line}: unknown stop reason `{}`", row.stop));
        }
        if !(0.0..=1.0 + 1e-12).contains(&row.r) {
            errs.push(format!("line {line}: R = {} outside [0, 1]", row.r));
        }
        if rows.last().is_some_and(|p| !(row.k >= p.k)) {
            errs.push(format!("line {line}: K decreases"));
        }
        rows.push(row);
    }
    if errs.is_empty() && csv_bytes(SWEEP_HEADER, rows.iter().map(SweepRow::cells)) != bytes {
        errs.push(format!("{SWEEP_FILE}: re-rendered rows differ from the file"));
    }
    if errs.is_empty() {
        Ok(rows.len())
    } else {
        Err(errs)
    }
}

/// Checks the manifest, the summary and whichever tables the recorded mode
/// produces.
pub fn validate_dir(dir: &Path) -> Report {
    let mut errs = Vec::new();
    let mut checked = Vec::new();
    let mode = match read_json(&dir.join(MANIFEST_FILE)) {
        Ok(doc) => {
            checked.push(MANIFEST_FILE.to_string());
            check_manifest(&doc, &mut errs)
        }
        Err(e) => {
            errs.push(e);
            None
        }
    };
    match read_json(&dir.join(SUMMARY_FILE)) {
        Ok(doc) => {
            checked.push(SUMMARY_FILE.to_string());
            if doc.get("schema_version").and_then(Value::as_u64) != Some(SCHEMA_VERSION as u64) {
                errs.push(format!("{SUMMARY_FILE}: schema_version must be {SCHEMA_VERSION}"));
            }
            if mode.is_some() && doc.get("mode").and_then(Value::as_str) != mode.map(|m| m.as_str()) {
                errs.push(format!("{SUMMARY_FILE}: mode disagrees with the manifest"));
            }
        }
        Err(e) => errs.push(e),
    }
    let table = match mode {
        Some(Mode::Finite | Mode::Kinetic) => Some((SERIES_FILE, check_series as TableCheck)),
        Some(Mode::Sweep) => Some((SWEEP_FILE, check_sweep as TableCheck)),
        _ => None,
    };
    if let Some((name, check)) = table {
        match check(&dir.join(name)) {
            Ok(n) => checked.push(format!("{name} ({n} rows)")),
            Err(e) => errs.extend(e.into_iter().map(|m| format!("{name}: {m}"))),
        }
    }
    if errs.is_empty() {
        Ok(checked)
    } else {
        Err(errs)
    }
}
