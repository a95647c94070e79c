//! Deterministic CSV/JSON emission.
//!
//! CSV files carry a single `#`-prefixed header line and RFC 4180 quoting;
//! numbers are rounded to 12 significant digits on emission so reruns are
//! byte-identical and diffs stay readable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::SimError;

/// One emitted cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 12 significant digits, exponent normalized away when compact.
pub fn format_sig(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.11e}");
    // keep plain decimal for small exponents so files stay human-readable
    let (mantissa, exp) = s.split_once('e').expect("exponent format");
    let e: i32 = exp.parse().expect("exponent parse");
    if (-3..=6).contains(&e) {
        let digits = (11 - e).max(0) as usize;
        let plain = format!("{x:.digits$}");
        // trim trailing zeros but keep one decimal
        let trimmed = plain.trim_end_matches('0');
        let trimmed = trimmed.strip_suffix('.').unwrap_or(trimmed);
        if trimmed.is_empty() || trimmed == "-" {
            "0".to_string()
        } else {
            trimmed.to_string()
        }
    } else {
        let m = mantissa.trim_end_matches('0');
        let m = m.strip_suffix('.').unwrap_or(m);
        format!("{m}e{e}")
    }
}

fn quote_csv(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A table destined for one output file.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Table {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn cell_str(c: &Cell) -> String {
        match c {
            Cell::Num(v) => format_sig(*v),
            Cell::Text(t) => quote_csv(t),
        }
    }

    /// Write as CSV; returns the path written.
    pub fn write_csv(&self, dir: &Path) -> Result<PathBuf, SimError> {
        let path = dir.join(format!("{}.csv", self.name));
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Self::cell_str).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        fs::write(&path, out)?;
        Ok(path)
    }

    /// Write as JSON ({"columns": [...], "rows": [[...], ...]}).
    pub fn write_json(&self, dir: &Path) -> Result<PathBuf, SimError> {
        let path = dir.join(format!("{}.json", self.name));
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Num(v) => {
                            serde_json::Value::String(format_sig(*v))
                        }
                        Cell::Text(t) => serde_json::Value::String(t.clone()),
                    })
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut f = fs::File::create(&path)?;
        writeln!(f, "{}", serde_json::to_string_pretty(&doc)?)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(2.0), "2");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(-1.23456789012345e10), "-1.23456789012e10");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(quote_csv("plain"), "plain");
        assert_eq!(quote_csv("a,b"), "\"a,b\"");
        assert_eq!(quote_csv("q\"q"), "\"q\"\"q\"");
    }

    #[test]
    fn round_trip_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![Cell::Num(1.0 / 3.0), Cell::Text("x".into())]);
        let p1 = t.write_csv(dir.path()).unwrap();
        let c1 = std::fs::read(&p1).unwrap();
        let p2 = t.write_csv(dir.path()).unwrap();
        let c2 = std::fs::read(&p2).unwrap();
        assert_eq!(c1, c2);
        assert!(String::from_utf8(c1).unwrap().starts_with("# a,b\n"));
    }
}
