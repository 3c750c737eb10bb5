//! CSV and JSON output, and sampled-function CSV input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cod_core::engine::SeriesRun;
use cod_core::{Grid, GridFunction, C64};
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::format::g17;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: line {line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("{path}: {msg}")]
    Grid { path: String, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.display().to_string(), source }
}

/// Writes a CSV table of preformatted cells.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Writes a CSV table with every number formatted by [`g17`].
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), IoError> {
    write_table(path, header, rows.into_iter().map(|r| r.into_iter().map(g17).collect()))
}

/// `x,re,im` rows of a grid function.
pub fn write_grid_function(path: &Path, coord: &str, f: &GridFunction) -> Result<(), IoError> {
    let rows = f.grid().points().zip(f.values()).map(|(x, v)| vec![x, v.re, v.im]);
    write_csv(path, &[coord, "re", "im"], rows)
}

/// Reads a numeric CSV with one header line.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let p = path.display().to_string();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let header = match lines.next() {
        Some((_, h)) => h.split(',').map(|s| s.trim().to_string()).collect(),
        None => return Err(IoError::Grid { path: p, msg: "empty file".into() }),
    };
    let mut rows = Vec::new();
    for (i, line) in lines {
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::Parse { path: p.clone(), line: i + 1, msg: e.to_string() })?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Reads `coord,re[,im]` samples on a uniform grid.
pub fn read_grid_function(path: &Path) -> Result<GridFunction, IoError> {
    let (_, rows) = read_csv(path)?;
    let p = path.display().to_string();
    let bad = |msg: &str| IoError::Grid { path: p.clone(), msg: msg.to_string() };
    if rows.len() < 2 {
        return Err(bad("need at least two samples"));
    }
    if rows.iter().any(|r| r.len() < 2) {
        return Err(bad("each row needs a coordinate and a real part"));
    }
    let start = rows[0][0];
    let step = rows[1][0] - rows[0][0];
    for (i, r) in rows.iter().enumerate() {
        let expect = start + step * i as f64;
        if (r[0] - expect).abs() > 1e-9 * (1.0 + expect.abs()) {
            return Err(bad("coordinates are not uniformly spaced"));
        }
    }
    let grid = Grid::new(start, step, rows.len()).map_err(|e| bad(&e.to_string()))?;
    let values = rows.iter().map(|r| C64::new(r[1], r.get(2).copied().unwrap_or(0.0))).collect();
    GridFunction::new(grid, values).map_err(|e| bad(&e.to_string()))
}

/// Convergence report written next to every solver output.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub label: String,
    pub terms_used: usize,
    pub stop_reason: String,
    pub term_sup_norms: Vec<f64>,
    pub defect_sup_norm: f64,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl RunReport {
    pub fn from_run<F>(run: &SeriesRun<F>, defect_sup_norm: f64) -> Self {
        RunReport {
            label: run.label.clone(),
            terms_used: run.terms_used,
            stop_reason: run.stop_reason.as_str().to_string(),
            term_sup_norms: run.term_sup_norms.clone(),
            defect_sup_norm,
            extra: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.extra.insert(key.to_string(), value.into());
        self
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Appends one JSON object per line.
pub fn write_json_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<(), IoError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    for item in items {
        let line = serde_json::to_string(item).expect("record serializes");
        writeln!(f, "{line}").map_err(io_err(path))?;
    }
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf, IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_function_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let grid = Grid::spanning(0.0, 1.0, 11).unwrap();
        let f = GridFunction::from_fn(grid, |t| C64::new(t.sin(), 1.0 / (1.0 + t)));
        write_grid_function(&path, "t", &f).unwrap();
        let g = read_grid_function(&path).unwrap();
        assert_eq!(g.values(), f.values());
        assert!(g.grid().matches(f.grid()));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,re,im\n0,0,1\n"));
    }

    #[test]
    fn rejects_irregular_and_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "t,re\n0,1\n0.1,1\n0.3,1\n").unwrap();
        assert!(matches!(read_grid_function(&path), Err(IoError::Grid { .. })));
        std::fs::write(&path, "t,re\n0,1\n0.1,abc\n").unwrap();
        assert!(matches!(read_grid_function(&path), Err(IoError::Parse { line: 3, .. })));
    }
}
