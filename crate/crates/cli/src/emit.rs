//! Output documents in CSV or JSON with a metadata header.

use crate::config::{Format, RunConfig};
use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};

pub const TOOL: &str = "blowup";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// Shortest round-trip decimal, switching to exponent form outside `[1e-4, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn value(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => Value::String(fmt_num(*x)),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Body {
    /// Rows under named columns.
    Table { columns: Vec<String>, rows: Vec<Vec<Cell>> },
    /// Ordered key/value pairs, written as a two-column table in CSV.
    Record(Vec<(String, Cell)>),
}

#[derive(Debug, Clone)]
pub struct Document {
    pub name: String,
    pub body: Body,
}

impl Document {
    pub fn table(name: &str, columns: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        Document {
            name: name.into(),
            body: Body::Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows },
        }
    }

    pub fn record(name: &str, pairs: Vec<(String, Cell)>) -> Self {
        Document { name: name.into(), body: Body::Record(pairs) }
    }
}

/// Collects `key = value` pairs for a record.
#[derive(Default)]
pub struct RecordBuilder(pub Vec<(String, Cell)>);

impl RecordBuilder {
    pub fn put(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn finish(self, name: &str) -> Document {
        Document::record(name, self.0)
    }
}

pub fn meta(config: &RunConfig) -> Value {
    json!({ "tool": TOOL, "version": VERSION, "config": config })
}

pub fn render(doc: &Document, config: &RunConfig, format: Format) -> Result<String> {
    match format {
        Format::Csv => render_csv(doc, config),
        Format::Json => render_json(doc, config),
    }
}

fn render_csv(doc: &Document, config: &RunConfig) -> Result<String> {
    let mut out = format!("# {TOOL} {VERSION}\n# config: {}\n", serde_json::to_string(config)?);
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    match &doc.body {
        Body::Table { columns, rows } => {
            wtr.write_record(columns)?;
            for row in rows {
                wtr.write_record(row.iter().map(Cell::text))?;
            }
        }
        Body::Record(pairs) => {
            wtr.write_record(["key", "value"])?;
            for (k, v) in pairs {
                wtr.write_record([k.clone(), v.text()])?;
            }
        }
    }
    out.push_str(std::str::from_utf8(&wtr.into_inner().context("flushing csv")?)?);
    Ok(out)
}

fn render_json(doc: &Document, config: &RunConfig) -> Result<String> {
    let data = match &doc.body {
        Body::Table { columns, rows } => Value::Array(
            rows.iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        columns.iter().cloned().zip(row.iter().map(Cell::value)).collect();
                    Value::Object(obj)
                })
                .collect(),
        ),
        Body::Record(pairs) => Value::Object(pairs.iter().map(|(k, v)| (k.clone(), v.value())).collect()),
    };
    let mut text = serde_json::to_string_pretty(&json!({ "meta": meta(config), "name": doc.name, "data": data }))?;
    text.push('\n');
    Ok(text)
}

/// Write one file; returns its path.
pub fn write_file(dir: &Path, file: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(file);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Print the first document to stdout, or write all of them into the output directory.
pub fn emit(docs: &[Document], config: &RunConfig) -> Result<()> {
    match &config.output_dir {
        None => {
            if let Some(first) = docs.first() {
                print!("{}", render(first, config, config.format)?);
            }
            if docs.len() > 1 {
                let rest: Vec<&str> = docs[1..].iter().map(|d| d.name.as_str()).collect();
                eprintln!("not written without --out: {}", rest.join(", "));
            }
        }
        Some(dir) => {
            for doc in docs {
                let file = format!("{}.{}", doc.name, config.format.extension());
                let path = write_file(dir, &file, &render(doc, config, config.format)?)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, 1.0, -2.5, 4.8, 1e-300, 123456.789, 3.0e20, -7.25e-9, 0.1 + 0.2] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(1e-5), "1e-5");
        assert_eq!(fmt_num(12.0), "12");
    }
}
