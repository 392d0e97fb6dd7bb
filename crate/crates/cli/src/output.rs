//! Deterministic text output: fixed 12-significant-digit numbers and a
//! `#`-prefixed provenance header on every file.

use std::fmt::Write as _;
use std::path::Path;

use spinbath::analysis::SweepResult;

use crate::error::{CliError, Result};

/// A named output file held in memory until written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: String) -> Self {
        Self { name: name.into(), contents }
    }
}

/// `x` with 12 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // Folds -0 into 0.
        return format!("{:.11e}", 0.0f64);
    }
    format!("{x:.11e}")
}

pub fn row(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(num).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone)]
pub struct Header {
    lines: Vec<String>,
}

impl Header {
    pub fn new(command: &str, config_hash: Option<&str>) -> Self {
        let mut lines = vec![
            format!("spinbath {}", env!("CARGO_PKG_VERSION")),
            format!("command = {command}"),
        ];
        if let Some(h) = config_hash {
            lines.push(format!("config_sha256 = {h}"));
        }
        Self { lines }
    }

    pub fn with(mut self, lines: impl IntoIterator<Item = String>) -> Self {
        self.lines.extend(lines);
        self
    }

    pub fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|l| format!("# {l}\n")).collect()
    }

    pub fn lines(&self) -> Vec<String> {
        self.lines.iter().map(|l| format!("# {l}")).collect()
    }
}

/// Sweep CSV: `grid_value,P_exc`, failed points as `nan` with a header note.
pub fn sweep_csv(header: &Header, sweep: &SweepResult<f64>, grid_name: &str) -> String {
    let mut h = header.clone();
    for f in &sweep.failures {
        h.push(format!("failed point {} ({grid_name} = {}): {}", f.index + 1, num(f.grid_value), f.error));
    }
    let mut out = h.render();
    let _ = writeln!(out, "{grid_name},P_exc");
    for (g, v) in sweep.grid.iter().zip(&sweep.values) {
        let value = v.map(num).unwrap_or_else(|| "nan".to_string());
        let _ = writeln!(out, "{},{value}", num(*g));
    }
    out
}

/// Writes artifacts into `dir`, creating it if needed. Files are written one
/// at a time in order.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
