//! Result documents and their table, CSV and JSON renderings.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(usize),
    Flag(bool),
    Empty,
}

impl Cell {
    fn render(&self, full: bool) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => number(*x, full),
            Cell::Int(k) => k.to_string(),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => Value::String(x.to_string()),
            Cell::Int(k) => json!(k),
            Cell::Flag(b) => json!(b),
            Cell::Empty => Value::Null,
        }
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

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Seven decimals by default, shortest round-trip form with `full`.
pub fn number(x: f64, full: bool) -> String {
    if full || !x.is_finite() {
        format!("{x:?}")
    } else {
        let s = format!("{x:.7}");
        if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
            s[1..].to_string()
        } else {
            s
        }
    }
}

/// A titled table, plus structured fields that only appear in JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub extra: Map<String, Value>,
}

impl Document {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.clone(), v.to_json()))
                        .collect(),
                )
            })
            .collect();
        let mut m = Map::new();
        m.insert("title".into(), Value::String(self.title.clone()));
        m.insert("rows".into(), Value::Array(rows));
        for (k, v) in &self.extra {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }
}

/// Settings echoed into JSON output.
#[derive(Clone, Debug, PartialEq)]
pub struct RunInfo {
    pub command: String,
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
}

pub fn render(docs: &[Document], format: Format, full: bool, info: &RunInfo) -> String {
    match format {
        Format::Table => render_table(docs, full),
        Format::Csv => render_csv(docs, full),
        Format::Json => {
            let v = json!({
                "schema": crate::problem::SCHEMA,
                "command": info.command,
                "tol": info.tol,
                "seed": info.seed,
                "samples": info.samples,
                "results": docs.iter().map(Document::to_json).collect::<Vec<_>>(),
            });
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
    }
}

fn render_table(docs: &[Document], full: bool) -> String {
    let mut out = String::new();
    for (i, d) in docs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{}", d.title);
        let cells: Vec<Vec<String>> = d.rows.iter().map(|r| r.iter().map(|c| c.render(full)).collect()).collect();
        let widths: Vec<usize> = d
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| cells.iter().map(|r| r[j].chars().count()).fold(c.chars().count(), usize::max))
            .collect();
        let line = |fields: Vec<&str>| {
            let mut s = String::new();
            for (j, f) in fields.iter().enumerate() {
                if j > 0 {
                    s.push_str("  ");
                }
                let pad = widths[j] - f.chars().count();
                s.push_str(f);
                s.extend(std::iter::repeat_n(' ', pad));
            }
            s.trim_end().to_string()
        };
        let _ = writeln!(out, "{}", line(d.columns.iter().map(String::as_str).collect()));
        for r in &cells {
            let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
        }
    }
    out
}

fn render_csv(docs: &[Document], full: bool) -> String {
    let mut out = String::new();
    for (i, d) in docs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["document".to_string()];
        header.extend(d.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for r in &d.rows {
            let mut rec = vec![d.title.clone()];
            rec.extend(r.iter().map(|c| c.render(full)));
            w.write_record(&rec).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(number(1.118033988749895, false), "1.1180340");
        assert_eq!(number(2.0 / 3.0, false), "0.6666667");
        assert_eq!(number(-1e-12, false), "0.0000000");
        assert_eq!(number(0.1, true), "0.1");
        assert_eq!(number(2.0 / 3.0, true), "0.6666666666666666");
    }

    #[test]
    fn table_alignment() {
        let mut d = Document::new("pairs", &["a", "value"]);
        d.push(vec!["long name".into(), 1.0.into()]);
        d.push(vec!["x".into(), Cell::Empty]);
        let s = render_table(&[d], false);
        assert_eq!(s, "pairs\na          value\nlong name  1.0000000\nx\n");
    }

    #[test]
    fn csv_quotes_labels() {
        let mut d = Document::new("t", &["a"]);
        d.push(vec!["x,y".into()]);
        assert_eq!(render_csv(&[d], false), "document,a\nt,\"x,y\"\n");
    }
}
