//! Table output in CSV (with `#` metadata lines) or JSON lines.

use std::fmt::Write as _;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" | "jsonl" | "json-lines" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    /// Expanded to `name_0, name_1, ...` in CSV, an array in JSON.
    List(Vec<f64>),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
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

/// Seventeen significant digits, round-trips exactly.
pub fn float(v: f64) -> String {
    if v == 0.0 {
        // keep -0 and 0 identical on disk
        "0.0000000000000000e0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn csv_cell(cell: &Cell, out: &mut String) {
    match cell {
        Cell::Float(v) => out.push_str(&float(*v)),
        Cell::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Cell::Text(s) => out.push_str(s),
        Cell::List(vs) => {
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&float(*v));
            }
        }
    }
}

fn json_cell(cell: &Cell, out: &mut String) {
    let num = |v: f64| {
        if v.is_finite() {
            float(v)
        } else {
            "null".to_string()
        }
    };
    match cell {
        Cell::Float(v) => out.push_str(&num(*v)),
        Cell::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Cell::Text(s) => out.push_str(&serde_json::to_string(s).expect("string serialises")),
        Cell::List(vs) => {
            out.push('[');
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&num(*v));
            }
            out.push(']');
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    meta: Vec<(String, Cell)>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        let mut t = Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        };
        t.meta("version", env!("CARGO_PKG_VERSION"));
        t.meta("command", command);
        t
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str("# ");
            out.push_str(k);
            out.push_str(": ");
            match v {
                Cell::List(vs) => {
                    out.push_str(&vs.iter().map(|x| float(*x)).collect::<Vec<_>>().join(" "))
                }
                _ => csv_cell(v, &mut out),
            }
            out.push('\n');
        }
        let header: Vec<String> = self
            .columns
            .iter()
            .enumerate()
            .flat_map(|(i, name)| match self.rows.first().map(|r| &r[i]) {
                Some(Cell::List(vs)) => (0..vs.len()).map(|j| format!("{name}_{j}")).collect(),
                _ => vec![name.clone()],
            })
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                csv_cell(cell, &mut out);
            }
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let mut out = String::from("{\"meta\":{");
        for (i, (k, v)) in self.meta.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            json_cell(&Cell::Text(k.clone()), &mut out);
            out.push(':');
            json_cell(v, &mut out);
        }
        out.push_str("}}\n");
        for row in &self.rows {
            out.push('{');
            for (i, (name, cell)) in self.columns.iter().zip(row).enumerate() {
                if i > 0 {
                    out.push(',');
                }
                json_cell(&Cell::Text(name.clone()), &mut out);
                out.push(':');
                json_cell(cell, &mut out);
            }
            out.push_str("}\n");
        }
        out
    }
}
