use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::error::CliResult;

/// One CSV field. Reals print in shortest round-trip form.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    B(bool),
    S(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::F(x) => write!(f, "{x}"),
            Cell::I(x) => write!(f, "{x}"),
            Cell::U(x) => write!(f, "{x}"),
            Cell::B(x) => write!(f, "{x}"),
            Cell::S(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::F(x) => serde_json::Number::from_f64(*x).map_or_else(|| Value::String(x.to_string()), Value::Number),
            Cell::I(x) => Value::from(*x),
            Cell::U(x) => Value::from(*x),
            Cell::B(x) => Value::Bool(*x),
            Cell::S(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::F(x)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Cell {
        Cell::U(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Cell {
        Cell::U(x as u64)
    }
}
impl From<i64> for Cell {
    fn from(x: i64) -> Cell {
        Cell::I(x)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Cell {
        Cell::B(x)
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Cell {
        Cell::S(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Cell {
        Cell::S(x.to_string())
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Cell {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// A table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Table {
        Table {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header of {}", self.name);
        self.rows.push(row);
    }

    fn csv_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(ToString::to_string)).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
    }

    fn json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    Value::Object(
                        self.header
                            .iter()
                            .zip(r)
                            .map(|(h, c)| (h.to_string(), c.to_json()))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

fn csv_err(e: csv::Error) -> crate::error::CliError {
    std::io::Error::other(e.to_string()).into()
}

/// A named PASS/FAIL outcome recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// What a subcommand produces before anything touches the disk.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub tables: Vec<Table>,
    /// Always written as JSON.
    pub documents: Vec<(String, Value)>,
    pub checks: Vec<Check>,
    /// Truncation or guard warnings; `--strict` turns any of these into exit code 3.
    pub warnings: Vec<String>,
}

/// A written file and its digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pretty JSON; `serde_json` maps keep keys sorted.
pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("values serialize");
    s.push(b'\n');
    s
}

fn write_file(dir: &Path, name: String, bytes: Vec<u8>) -> CliResult<FileRecord> {
    std::fs::write(dir.join(&name), &bytes)?;
    Ok(FileRecord {
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
        name,
    })
}

impl Output {
    /// Writes every table and document; returns the records sorted by name.
    pub fn write(&self, dir: &Path, format: Format) -> CliResult<Vec<FileRecord>> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for t in &self.tables {
            let rec = match format {
                Format::Csv => write_file(dir, format!("{}.csv", t.name), t.csv_bytes()?)?,
                Format::Json => write_file(dir, format!("{}.json", t.name), json_bytes(&t.json_value()))?,
            };
            files.push(rec);
        }
        for (name, v) in &self.documents {
            files.push(write_file(dir, format!("{name}.json"), json_bytes(v))?);
        }
        files.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(files)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting_and_format() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        t.push(vec![Cell::F(0.1), Cell::S("x,y".into()), Cell::Empty]);
        t.push(vec![Cell::F(1e-20), Cell::B(true), Cell::U(3)]);
        let s = String::from_utf8(t.csv_bytes().unwrap()).unwrap();
        assert_eq!(s, "a,b,c\n0.1,\"x,y\",\n0.00000000000000000001,true,3\n");
        let j = t.json_value();
        assert_eq!(j[0]["a"], serde_json::json!(0.1));
        assert!(j[0]["c"].is_null());
    }

    #[test]
    fn digests_match_written_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::default();
        let mut t = Table::new("rows", &["k"]);
        t.push(vec![Cell::U(1)]);
        out.tables.push(t);
        out.documents.push(("doc".into(), serde_json::json!({"b": 1, "a": 2})));
        let files = out.write(dir.path(), Format::Csv).unwrap();
        assert_eq!(files.len(), 2);
        for f in &files {
            let bytes = std::fs::read(dir.path().join(&f.name)).unwrap();
            assert_eq!(sha256_hex(&bytes), f.sha256);
        }
        let doc = std::fs::read_to_string(dir.path().join("doc.json")).unwrap();
        assert!(doc.find("\"a\"").unwrap() < doc.find("\"b\"").unwrap());
    }
}
