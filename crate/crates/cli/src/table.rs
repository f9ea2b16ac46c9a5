//! CSV tables, profile files and key-value metadata blocks.
//!
//! Floats are written in scientific notation with 12 significant digits so
//! reruns produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use loghardy_core::{Grid, Profile};

use crate::CliError;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes the nodal values as `r,u` rows.
pub fn write_profile(path: &Path, u: &Profile) -> Result<(), CliError> {
    let mut t = Table::new(&["r", "u"]);
    for (&r, &v) in u.grid().nodes().iter().zip(u.values()) {
        t.push(vec![r.into(), v.into()]);
    }
    t.write(path)
}

/// Reads an `r,u` file back into a profile on the grid its nodes define.
pub fn read_profile(path: &Path) -> Result<Profile, CliError> {
    let mut rd = csv::Reader::from_path(path)?;
    let header = rd.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["r", "u"] {
        return Err(CliError::Config(format!(
            "{}: expected header 'r,u'",
            path.display()
        )));
    }
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let parse = |j: usize| -> Result<f64, CliError> {
            rec.get(j)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    CliError::Config(format!("{}: bad number on row {}", path.display(), i + 2))
                })
        };
        nodes.push(parse(0)?);
        values.push(parse(1)?);
    }
    let grid = Arc::new(Grid::from_nodes(nodes)?);
    Ok(Profile::new(grid, values)?)
}

/// Writes `key = value` lines.
pub fn write_metadata(path: &Path, entries: &[(&str, String)]) -> Result<(), CliError> {
    let mut s = String::new();
    for (k, v) in entries {
        writeln!(s, "{k} = {v}").expect("writing to a String");
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use loghardy_core::radial::make_grid;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(0.960674926), "9.60674926000e-1");
        assert_eq!(fmt_f64(-1.0 / 3.0), "-3.33333333333e-1");
    }

    #[test]
    fn profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let g = Arc::new(make_grid(50, 2.0).unwrap());
        let u = Profile::from_fn(g, |r| (1.0 - r) * (2.0 + r)).unwrap();
        write_profile(&path, &u).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("r,u\n"));
        let back = read_profile(&path).unwrap();
        assert_eq!(back.values().len(), u.values().len());
        for (a, b) in back.values().iter().zip(u.values()) {
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,y\n0.5,1\n1,0\n").unwrap();
        assert!(matches!(read_profile(&path), Err(CliError::Config(_))));
    }
}
