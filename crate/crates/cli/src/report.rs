//! Reports rendered as text, one JSON document, and CSV for tables.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            // non-finite values have no JSON number form
            Cell::Real(v) if v.is_finite() => json!(v),
            Cell::Real(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Flag(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
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

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub struct Report {
    command: String,
    fields: Vec<(String, Cell)>,
    notes: Vec<String>,
    table: Option<(String, Table)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            fields: Vec::new(),
            notes: Vec::new(),
            table: None,
        }
    }

    pub fn field(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<Cell>>) -> &mut Self {
        let table = Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        };
        self.table = Some((name.to_string(), table));
        self
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{k:<width$}  {}", v.text());
        }
        if let Some((name, t)) = &self.table {
            let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
            let widths: Vec<usize> = (0..t.header.len())
                .map(|i| {
                    cells
                        .iter()
                        .map(|r| r[i].len())
                        .chain([t.header[i].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let _ = writeln!(out, "{name}:");
            let line = |row: &[String]| {
                row.iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(out, "  {}", line(&t.header));
            for r in &cells {
                let _ = writeln!(out, "  {}", line(r));
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "{n}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("command".into(), json!(self.command));
        for (k, v) in &self.fields {
            doc.insert(k.clone(), v.json());
        }
        if !self.notes.is_empty() {
            doc.insert("notes".into(), json!(self.notes));
        }
        if let Some((name, t)) = &self.table {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> =
                        t.header.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                    Value::Object(obj)
                })
                .collect();
            doc.insert(name.clone(), Value::Array(rows));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Option<String> {
        let (_, t) = self.table.as_ref()?;
        let mut out = t.header.join(",");
        out.push('\n');
        for r in &t.rows {
            out.push_str(&r.iter().map(Cell::text).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        Some(out)
    }
}
