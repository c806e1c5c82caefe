//! Tabular output in human, CSV and JSON encodings.
//!
//! Machine encodings carry every float rounded to 12 significant digits and
//! written in its shortest round-trip form, so CSV and JSON hold the same
//! values.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Json,
}

/// How a column is printed in human mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Text,
    Count,
    /// Probabilities and other inputs, printed as given.
    Plain,
    /// Trial counts and their spread, two decimals.
    Trials,
    /// Error percentages and ratios, three decimals.
    Fine,
    /// Small probabilities, scientific.
    Sci,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Count(u64),
    Float(f64),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Count(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Count(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<(&'static str, Style)>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra top-level values (JSON) or footer lines (human). Not in CSV.
    pub meta: Vec<(&'static str, Cell)>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<(&'static str, Style)>) -> Self {
        Table {
            command,
            columns,
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(c, _)| *c == name)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.to_human(),
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_human(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.columns)
                    .map(|(c, &(_, style))| human_cell(c, style))
                    .collect()
            })
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, (name, _))| {
                cells
                    .iter()
                    .map(|r| r[i].len())
                    .chain(std::iter::once(name.len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, items: &mut dyn Iterator<Item = &str>| {
            let parts: Vec<String> = items
                .zip(&widths)
                .map(|(s, &w)| format!("{s:>w$}"))
                .collect();
            out.push_str(parts.join("  ").trim_end());
            out.push('\n');
        };
        line(&mut out, &mut self.columns.iter().map(|(n, _)| *n));
        for row in &cells {
            line(&mut out, &mut row.iter().map(String::as_str));
        }
        for (key, value) in &self.meta {
            let _ = writeln!(out, "{key}: {}", human_cell(value, Style::Sci));
        }
        out
    }

    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|(n, _)| *n))
            .expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(machine_text))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    fn to_json(&self) -> String {
        let mut top = Map::new();
        top.insert("command".into(), Value::from(self.command));
        for (key, value) in &self.meta {
            top.insert((*key).into(), json_value(value));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|((name, _), c)| ((*name).to_owned(), json_value(c)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        top.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json");
        s.push('\n');
        s
    }
}

/// Round to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn json_value(c: &Cell) -> Value {
    match c {
        Cell::Text(s) => Value::from(s.as_str()),
        Cell::Count(v) => Value::from(*v),
        Cell::Float(v) => serde_json::Number::from_f64(round_sig12(*v))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Cell::Empty => Value::Null,
    }
}

fn machine_text(c: &Cell) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
        _ => match json_value(c) {
            Value::Null => String::new(),
            v => v.to_string(),
        },
    }
}

fn human_cell(c: &Cell, style: Style) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        Cell::Count(v) => v.to_string(),
        Cell::Empty => "-".to_owned(),
        Cell::Float(v) => match style {
            Style::Trials => format!("{v:.2}"),
            Style::Fine => format!("{v:.3}"),
            Style::Sci => format!("{v:.6e}"),
            Style::Text | Style::Count | Style::Plain => v.to_string(),
        },
    }
}
