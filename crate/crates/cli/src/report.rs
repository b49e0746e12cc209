//! Report envelope and output formats.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

/// Rows for `--format csv`.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub result: Value,
    pub diagnostics: Value,
    #[serde(skip)]
    pub table: Table,
}

impl Report {
    pub fn new(command: &'static str, inputs: Value, result: Value, table: Table) -> Self {
        Self {
            command,
            inputs,
            seed: None,
            result,
            diagnostics: json!({}),
            table,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_diagnostics(mut self, diagnostics: Value) -> Self {
        self.diagnostics = diagnostics;
        self
    }

    pub fn write_json(&self, out: &mut impl Write) -> std::io::Result<()> {
        serde_json::to_writer(&mut *out, self)?;
        writeln!(out)
    }

    pub fn write_csv(&self, out: &mut impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.table.header)?;
        for row in &self.table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `serde_json::to_value` for report payloads, which always serialize.
pub fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report payloads serialize")
}
