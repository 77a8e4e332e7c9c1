//! File output: JSON (full nested summary) and CSV (the stable machine
//! interface, one row per cell).

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::HarnessError;
use crate::summary::Summary;

/// CSV header: one row per `(i_or_k, t)` cell, with the fitted slope of the
/// matching series repeated on each of its rows (empty when absent).
pub const CSV_HEADER: &str = "kind,n,i_or_k,t,prob,ci_lo,ci_hi,slope";

pub fn summary_to_csv(summary: &Summary) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for cell in &summary.cells {
        let slope = summary
            .slopes
            .iter()
            .find(|s| s.n == cell.n && s.i_or_k == cell.i_or_k)
            .map(|s| format!("{}", s.slope))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            summary.kind, cell.n, cell.i_or_k, cell.t, cell.prob, cell.ci_lo, cell.ci_hi, slope
        ));
    }
    out
}

/// Writes `summary.json` / `summary.csv` under `dir` per the requested
/// format ("json", "csv" or "both"). Returns the written paths.
pub fn export(summary: &Summary, dir: &Path, format: &str) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    if format == "json" || format == "both" {
        let path = dir.join("summary.json");
        fs::write(&path, summary.to_json()?).map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    if format == "csv" || format == "both" {
        let path = dir.join("summary.csv");
        fs::write(&path, summary_to_csv(summary)).map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    if written.is_empty() {
        return Err(HarnessError::ConfigInvalid(format!(
            "unknown output format '{format}' (expected json, csv or both)"
        )));
    }
    Ok(written)
}
