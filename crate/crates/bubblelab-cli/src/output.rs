//! Artifact writing and reading: JSON reports and CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use bubblelab::{BubbleError, Result};
use serde_json::Value;

/// Pretty JSON text of a report.
pub fn pretty(value: &Value) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| BubbleError::Io(e.to_string()))
}

/// Creates `dir` (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| BubbleError::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Writes a pretty JSON file with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| BubbleError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Reads a JSON file.
pub fn read_json(path: &Path) -> Result<Value> {
    let text =
        fs::read_to_string(path).map_err(|e| BubbleError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| BubbleError::Parse(format!("{}: {e}", path.display())))
}

/// Shortest round-trip text of a float.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> BubbleError {
    BubbleError::Io(format!("{}: {e}", path.display()))
}

/// Writes a CSV table with a header row.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

/// A numeric CSV table read back by column name.
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Reads a CSV whose cells are all numeric.
    pub fn read(path: &Path) -> Result<Table> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let header: Vec<String> = r
            .headers()
            .map_err(|e| csv_err(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = vec![];
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let row = rec
                .iter()
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| {
                        BubbleError::Parse(format!("{}: row {}: non-numeric cell \"{c}\"", path.display(), i + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Table {
            path: path.to_path_buf(),
            header,
            rows,
        })
    }

    /// A column by name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| BubbleError::MissingKey(format!("{name} (column of {})", self.path.display())))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }
}
