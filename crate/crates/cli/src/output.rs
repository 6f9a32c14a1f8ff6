//! Tables, provenance headers and file emission.

use crate::config::Format;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One line identifying the tool, library and configuration behind a file.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(command: &str, config_bytes: &[u8]) -> Self {
        let digest = Sha256::digest(config_bytes);
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        Self { command: command.to_string(), config_sha256: hex }
    }

    pub fn line(&self) -> String {
        format!(
            "# cassini-stab {} cassini-core {} command={} config-sha256={}",
            env!("CARGO_PKG_VERSION"),
            cassini_core::VERSION,
            self.command,
            self.config_sha256
        )
    }

    pub fn json(&self) -> Value {
        json!({
            "tool": "cassini-stab",
            "version": env!("CARGO_PKG_VERSION"),
            "core_version": cassini_core::VERSION,
            "command": self.command,
            "config_sha256": self.config_sha256,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:.12e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
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

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Two columns, `key` and `value`.
    pub fn key_value(pairs: Vec<(&str, Cell)>) -> Self {
        let mut t = Table::new(&["key", "value"]);
        for (k, v) in pairs {
            t.push(vec![k.into(), v]);
        }
        t
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, prov: &Provenance) -> String {
        match format {
            Format::Csv => self.delimited(prov, ",", ""),
            Format::Gnuplot => self.delimited(prov, " ", "# "),
            Format::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                let doc = json!({ "provenance": prov.json(), "columns": self.columns, "rows": rows });
                serde_json::to_string_pretty(&doc).expect("tables serialize") + "\n"
            }
        }
    }

    fn delimited(&self, prov: &Provenance, sep: &str, header_prefix: &str) -> String {
        let mut s = prov.line();
        s.push('\n');
        s.push_str(header_prefix);
        s.push_str(&self.columns.join(sep));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::text).collect();
            s.push_str(&cells.join(sep));
            s.push('\n');
        }
        s
    }
}

/// A file to be written under the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn table(stem: &str, table: &Table, format: Format, prov: &Provenance) -> Self {
        Self { name: format!("{stem}.{}", format.extension()), contents: table.render(format, prov) }
    }

    /// Plain text dump with the provenance line prepended.
    pub fn text(name: &str, body: &str, prov: &Provenance) -> Self {
        Self { name: name.to_string(), contents: format!("{}\n{body}", prov.line()) }
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join(&self.name);
        std::fs::write(&path, &self.contents)?;
        Ok(path)
    }
}
