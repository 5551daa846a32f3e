//! Result tables, CSV/JSON emission and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Named columns, data rows and an optional fit summary.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Written as a trailing CSV row labelled `fit` and as `summary` in JSON.
    pub summary: Option<Vec<(&'static str, f64)>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        if let Some(summary) = &self.summary {
            let mut rec = vec!["fit".to_string()];
            rec.extend(summary.iter().map(|(k, v)| format!("{k}={v:.16e}")));
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self, command: &str, config_hash: &str) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect()))
            .collect();
        let mut doc = json!({
            "command": command,
            "config_hash": config_hash,
            "columns": self.columns,
            "rows": rows,
        });
        if let Some(summary) = &self.summary {
            let map: BTreeMap<&str, f64> = summary.iter().copied().collect();
            doc["summary"] = json!(map);
        }
        doc
    }
}

pub fn config_hash(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub config: String,
    pub seed: u64,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

/// Writes `<cmd>-<hash>.csv`, `<cmd>-<hash>.json` and `<cmd>-<hash>.manifest.json`.
pub fn emit(
    dir: &Path,
    command: &str,
    hash: &str,
    table: &Table,
    mut manifest: RunManifest,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let stem = format!("{command}-{}", &hash[..16]);
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    fs::write(&csv_path, table.to_csv()?)?;
    let mut json = serde_json::to_string_pretty(&table.to_json(command, hash))?;
    json.push('\n');
    fs::write(&json_path, json)?;
    manifest.outputs = vec![csv_path.display().to_string(), json_path.display().to_string()];
    manifest.finished = chrono::Utc::now().to_rfc3339();
    let mut text = serde_json::to_string_pretty(&serde_json::to_value(&manifest)?)?;
    text.push('\n');
    fs::write(&manifest_path, text)?;
    Ok(vec![csv_path, json_path, manifest_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_in_csv() {
        let mut t = Table::new(vec!["x"]);
        let x = 0.1f64 + 0.2;
        t.push(vec![x.into()]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        let parsed: f64 = text.lines().nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, x);
    }

    #[test]
    fn json_keys_are_sorted() {
        let mut t = Table::new(vec!["zeta", "alpha"]);
        t.push(vec![1.0.into(), 2.0.into()]);
        let doc = t.to_json("spectrum", "abc");
        let row = serde_json::to_string(&doc["rows"][0]).unwrap();
        assert_eq!(row, r#"{"alpha":2.0,"zeta":1.0}"#);
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.find("\"columns\"").unwrap() < text.find("\"rows\"").unwrap());
    }

    #[test]
    fn hash_is_hex_sha256() {
        let h = config_hash("command = spectrum\n");
        assert_eq!(h.len(), 64);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
    }
}
