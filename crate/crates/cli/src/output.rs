//! Tables and their CSV/JSON encodings.
//!
//! Reals are written to CSV as `{:.16e}` (17 significant digits), which
//! parses back to the identical `f64`. JSON uses the shortest representation
//! that round-trips.

use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Number, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    pub fn real(x: Option<f64>) -> Cell {
        x.map_or(Cell::Missing, Cell::Real)
    }

    fn csv_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Text(t) => t.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json_value(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Real(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Text(t) => Value::from(t.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

/// Scientific notation with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv_field))?;
        }
        writer.into_inner().context("flushing CSV buffer")
    }

    /// An array with one object per row, keys in column order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let object: Map<String, Value> =
                        self.header.iter().cloned().zip(row.iter().map(Cell::json_value)).collect();
                    Value::Object(object)
                })
                .collect(),
        )
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => encode_json(&self.to_json()),
        }
    }
}

/// Pretty JSON followed by a newline.
pub fn encode_json(value: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.16452315601374728] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
        assert!(format_real(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut t = Table::new(&["n", "value", "note"]);
        t.push(vec![Cell::from(3u32), Cell::Real(0.5), Cell::from("a, \"b\"")]);
        t.push(vec![Cell::from(4u32), Cell::Missing, Cell::Bool(true)]);
        let csv = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(csv, "n,value,note\n3,5.0000000000000000e-1,\"a, \"\"b\"\"\"\n4,,true\n");
        let json = t.to_json();
        assert_eq!(json[0]["value"], Value::from(0.5));
        assert_eq!(json[1]["value"], Value::Null);
        let keys: Vec<&String> = json[0].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["n", "value", "note"]);
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\n");
        assert_eq!(encode_json(&t.to_json()).unwrap(), b"[]\n");
    }
}
