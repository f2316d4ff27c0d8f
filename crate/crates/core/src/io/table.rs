//! Column tables as CSV: `,` delimiter, LF line endings, 12 significant
//! digits, one header row.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, header: impl Into<String>, column: Vec<f64>) -> Self {
        self.push(header, column);
        self
    }

    pub fn push(&mut self, header: impl Into<String>, column: Vec<f64>) {
        self.headers.push(header.into());
        self.columns.push(column);
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, header: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == header)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn to_csv(&self) -> Result<String> {
        let rows = self.rows();
        if let Some((i, _)) = self
            .columns
            .iter()
            .enumerate()
            .find(|(_, c)| c.len() != rows)
        {
            return Err(Error::Domain(format!(
                "column `{}` has the wrong length",
                self.headers[i]
            )));
        }
        for (name, col) in self.headers.iter().zip(&self.columns) {
            if let Some(index) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    series: name.clone(),
                    index,
                });
            }
        }
        let mut out = self.headers.join(",");
        out.push('\n');
        for r in 0..rows {
            for (c, col) in self.columns.iter().enumerate() {
                if c > 0 {
                    out.push(',');
                }
                out.push_str(&format_number(col[r]));
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Twelve significant digits in scientific notation.
pub fn format_number(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v:.11e}").unwrap();
    s
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    std::fs::write(path, table.to_csv()?)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Table> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Domain("empty CSV".into()))?;
    let headers: Vec<String> = header.split(',').map(|h| h.trim().to_string()).collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for (r, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != headers.len() {
            return Err(Error::Domain(format!(
                "CSV row {} has {} cells",
                r + 1,
                cells.len()
            )));
        }
        for (col, cell) in columns.iter_mut().zip(cells) {
            let v = cell.trim().parse::<f64>().map_err(|_| {
                Error::Domain(format!("CSV row {}: `{cell}` is not a number", r + 1))
            })?;
            col.push(v);
        }
    }
    Ok(Table { headers, columns })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
