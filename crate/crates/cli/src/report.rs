//! One computed result, pre-rendered in every output format.

use serde::Serialize;

use crate::args::OutputFormat;

pub struct Report {
    json: String,
    table: String,
    csv: String,
}

impl Report {
    pub fn new<T: Serialize>(value: &T, table: String, csv: String) -> Self {
        let json = serde_json::to_string_pretty(value).expect("report types serialize");
        Self { json, table, csv }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut s = match format {
            OutputFormat::Json => self.json.clone(),
            OutputFormat::Table => self.table.clone(),
            OutputFormat::Csv => self.csv.clone(),
        };
        if !s.ends_with('\n') {
            s.push('\n');
        }
        s
    }
}

pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// Two-column `name  value` layout.
pub fn key_value_table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}
