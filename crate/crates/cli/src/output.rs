//! CSV and JSON tables with fixed number formatting.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// `None` prints as an empty CSV field and JSON null.
    Num(Option<f64>),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn num(v: f64) -> Cell {
        Cell::Num(Some(v))
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(Some(v)) if v.is_finite() => fmt_e12(*v),
            Cell::Num(_) => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => csv_escape(s),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn json(&self) -> Value {
        match self {
            // parsing the printed digits back keeps JSON and CSV in agreement
            Cell::Num(Some(v)) if v.is_finite() => Value::from(fmt_e12(*v).parse::<f64>().expect("formatted float")),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// `printf("%.12e")`: twelve fraction digits, signed exponent of at least
/// two digits.
pub fn fmt_e12(v: f64) -> String {
    let s = format!("{v:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

/// Output document: parameter echo, optional summary, one table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    pub parameters: Vec<(String, Cell)>,
    pub summary: Vec<(String, Cell)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, parameters: Vec<(String, Cell)>, columns: Vec<Column>) -> Table {
        Table {
            command,
            parameters,
            summary: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# sit {VERSION}\n# command = {}\n", self.command);
        for (k, v) in &self.parameters {
            out.push_str(&format!("# {k} = {}\n", v.csv()));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# summary {k} = {}\n", v.csv()));
        }
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| if c.unit.is_empty() { c.name.to_string() } else { format!("{} ({})", c.name, c.unit) })
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("version".into(), Value::from(VERSION));
        doc.insert("command".into(), Value::from(self.command));
        doc.insert("parameters".into(), object(&self.parameters));
        if !self.summary.is_empty() {
            doc.insert("summary".into(), object(&self.summary));
        }
        let columns: Vec<Value> = self
            .columns
            .iter()
            .map(|c| serde_json::json!({ "name": c.name, "unit": c.unit }))
            .collect();
        doc.insert("columns".into(), Value::from(columns));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::from(r.iter().map(Cell::json).collect::<Vec<_>>()))
            .collect();
        doc.insert("rows".into(), Value::from(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

pub fn object(pairs: &[(String, Cell)]) -> Value {
    Value::Object(pairs.iter().map(|(k, v)| (k.clone(), v.json())).collect())
}

/// Writes to `path`, or standard output when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(format!("cannot write to standard output: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(fmt_e12(1.5), "1.500000000000e+00");
        assert_eq!(fmt_e12(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(fmt_e12(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e12(6.02e123), "6.020000000000e+123");
    }

    #[test]
    fn missing_values_are_empty_and_null() {
        let mut t = Table::new("t", vec![], vec![col("a", ""), col("b", "c")]);
        t.rows.push(vec![Cell::num(1.0), Cell::Num(None)]);
        assert!(t.to_csv().ends_with("a,b (c)\n1.000000000000e+00,\n"));
        assert!(t.to_json().contains("null"));
    }

    #[test]
    fn text_is_quoted_when_needed() {
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("plain"), "plain");
    }
}
