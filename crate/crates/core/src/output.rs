//! CSV and JSON emission shared by the simulators and the command line.
//!
//! Numbers are written with 17 significant digits so every `f64` survives a
//! text round trip bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Format a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Render a table. `comments` become leading `# ` lines.
pub fn render_csv(comments: &[String], header: &[&str], columns: &[&[f64]]) -> String {
    let rows = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let _ = writeln!(out, "{}", header.join(","));
    for r in 0..rows {
        let row: Vec<String> = columns
            .iter()
            .map(|c| c.get(r).map_or_else(String::new, |&v| fmt_f64(v)))
            .collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn write_csv(
    path: &Path,
    comments: &[String],
    header: &[&str],
    columns: &[&[f64]],
) -> Result<()> {
    fs::write(path, render_csv(comments, header, columns))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::LabError::Simulation(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
