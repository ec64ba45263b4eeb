use std::io::Write;

use clap::ValueEnum;
use emeasure::BallReal;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// What a command produces: a JSON document plus a flat table for CSV and
/// text output.
pub struct Report {
    pub json: Value,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(json: Value, headers: &[&str], rows: Vec<Vec<String>>) -> Self {
        Report { json, headers: headers.iter().map(|h| h.to_string()).collect(), rows }
    }

    /// A one-row report whose table mirrors the given `(key, value)` pairs.
    pub fn single(json: Value, pairs: Vec<(&str, String)>) -> Self {
        let headers: Vec<&str> = pairs.iter().map(|(k, _)| *k).collect();
        let row = pairs.iter().map(|(_, v)| v.clone()).collect();
        Report::new(json, &headers, vec![row])
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.json)?;
                writeln!(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.headers)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()
            }
            Format::Text => self.write_text(out),
        }
    }

    fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        if self.rows.len() == 1 {
            let width = self.headers.iter().map(|h| h.len()).max().unwrap_or(0);
            for (h, v) in self.headers.iter().zip(&self.rows[0]) {
                writeln!(out, "{h:<width$}  {v}")?;
            }
            return Ok(());
        }
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        writeln!(out, "{}", line(&self.headers))?;
        for r in &self.rows {
            writeln!(out, "{}", line(r))?;
        }
        Ok(())
    }
}

/// JSON object for a ball: certified rendering plus outward-rounded ends.
pub fn ball_json(b: &BallReal) -> Value {
    json!({ "value": b.to_string(), "lo": b.lo_string(20), "hi": b.hi_string(20) })
}
