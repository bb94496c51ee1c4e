use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use hermitana::{Complex, Matrix, Vector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: String,
    pub config: RunConfig,
    pub results: Value,
    pub residuals: BTreeMap<String, Residual>,
    pub verdicts: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: Tool { name: "hermitana", version: env!("CARGO_PKG_VERSION") },
            command: command.to_string(),
            config: config.clone(),
            results: json!({}),
            residuals: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            wall_time_s: None,
        }
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results[key] = serde_json::to_value(value).expect("serializable result");
    }

    pub fn residual(&mut self, key: &str, value: f64, tolerance: f64) {
        self.residuals.insert(key.to_string(), Residual { value, tolerance });
    }

    pub fn verdict(&mut self, key: &str, value: impl Serialize) {
        self.verdicts.insert(key.to_string(), serde_json::to_value(value).expect("serializable verdict"));
    }

    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        match out {
            Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
            None => {
                use std::io::Write;
                let mut out = std::io::stdout().lock();
                match writeln!(out, "{text}") {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    r => r.context("writing the report to stdout"),
                }
            }
        }
    }
}

pub fn complex(z: Complex) -> [f64; 2] {
    [z.re, z.im]
}

/// Row-major nested `[re, im]` pairs.
pub fn matrix(m: &Matrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| complex(m[(i, j)])).collect()).collect()
}

pub fn vector(v: &Vector) -> Vec<[f64; 2]> {
    v.iter().map(|z| complex(*z)).collect()
}

/// Per-step series written as CSV with a fixed header.
pub struct Series {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Series {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row.iter().map(|x| format!("{x:?}")).collect());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Column names `prefix{i}{j}_re, prefix{i}{j}_im` for an `n × n` matrix.
pub fn matrix_columns(prefix: &str, n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(format!("{prefix}{i}{j}_re"));
            out.push(format!("{prefix}{i}{j}_im"));
        }
    }
    out
}

pub fn matrix_values(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_are_row_major_pairs() {
        let m = Matrix::from_row_slice(2, 2, &[Complex::new(1.0, 2.0), Complex::new(3.0, 0.0), Complex::new(0.0, -1.0), Complex::new(4.0, 5.0)]);
        assert_eq!(matrix(&m), vec![vec![[1.0, 2.0], [3.0, 0.0]], vec![[0.0, -1.0], [4.0, 5.0]]]);
        assert_eq!(matrix_values(&m), vec![1.0, 2.0, 3.0, 0.0, 0.0, -1.0, 4.0, 5.0]);
        assert_eq!(matrix_columns("h", 2)[..4], ["h00_re", "h00_im", "h01_re", "h01_im"]);
    }
}
