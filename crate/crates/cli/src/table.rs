//! Tabular output with a `#` metadata block (CSV) or the same schema as a
//! JSON document.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig, CONFIG_BEGIN, CONFIG_END};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Missing,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }

    fn text(&self) -> String {
        match *self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(v) => fmt_sig(v),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Int(i) => json!(i),
            // round through the printed form so both formats carry the same digits
            Cell::Float(v) if v.is_finite() => json!(fmt_sig(v).parse::<f64>().unwrap()),
            Cell::Float(_) | Cell::Missing => Value::Null,
        }
    }
}

/// Fifteen significant digits in scientific notation.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.14e}")
}

pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// `key: value` facts about the run (tolerances, turning points, ...).
    pub info: Vec<(String, String)>,
    pub notices: Vec<String>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self {
            command,
            columns: columns.to_vec(),
            rows: Vec::new(),
            info: Vec::new(),
            notices: Vec::new(),
        }
    }

    pub fn info(&mut self, key: &str, value: impl ToString) {
        self.info.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, cfg: &RunConfig, out: &mut dyn Write) -> std::io::Result<()> {
        match cfg.format.unwrap_or_default() {
            Format::Csv => self.write_csv(cfg, out),
            Format::Json => self.write_json(cfg, out),
        }
    }

    fn write_csv(&self, cfg: &RunConfig, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "# {}", tool_line())?;
        writeln!(out, "# command: {}", self.command)?;
        for (k, v) in &self.info {
            writeln!(out, "# {k}: {v}")?;
        }
        for n in &self.notices {
            writeln!(out, "# notice: {n}")?;
        }
        writeln!(out, "{CONFIG_BEGIN}")?;
        for line in cfg.to_toml().lines() {
            if line.is_empty() {
                writeln!(out, "#")?;
            } else {
                writeln!(out, "# {line}")?;
            }
        }
        writeln!(out, "{CONFIG_END}")?;
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::text).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    fn write_json(&self, cfg: &RunConfig, out: &mut dyn Write) -> std::io::Result<()> {
        let info: Map<String, Value> = self.info.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(m)
            })
            .collect();
        let doc = json!({
            "metadata": {
                "tool": tool_line(),
                "command": self.command,
                "info": info,
                "notices": self.notices,
                "config": cfg,
            },
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)
    }
}

fn tool_line() -> String {
    format!("qphase-cli {} (core {})", env!("CARGO_PKG_VERSION"), qphase::VERSION)
}
