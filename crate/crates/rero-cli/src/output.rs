//! Row-oriented output: CSV with a header row (RFC 4180 quoting) or JSON
//! lines, reals printed losslessly with 17 significant digits.

use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Str(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

pub type Row = Vec<(&'static str, Cell)>;

/// 17 significant digits: enough to reproduce any f64 exactly on parse.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn cell_string(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => fmt_f64(*v),
        Cell::Str(v) => v.clone(),
    }
}

fn cell_json(cell: &Cell) -> serde_json::Value {
    match cell {
        Cell::Int(v) => serde_json::Value::from(*v),
        Cell::Float(v) => serde_json::Number::from_f64(*v)
            .map(serde_json::Value::Number)
            // JSON has no non-finite numbers; fall back to the CSV spelling.
            .unwrap_or_else(|| serde_json::Value::String(fmt_f64(*v))),
        Cell::Str(v) => serde_json::Value::String(v.clone()),
    }
}

/// Write rows to `out` in the requested format. All rows must share one
/// column layout; the CSV header comes from the first row.
pub fn write_rows<W: Write>(out: &mut W, format: Format, rows: &[Row]) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            if let Some(first) = rows.first() {
                writer.write_record(first.iter().map(|(name, _)| *name))?;
            }
            for row in rows {
                writer.write_record(row.iter().map(|(_, cell)| cell_string(cell)))?;
            }
            writer.flush()?;
        }
        Format::Json => {
            for row in rows {
                let map: serde_json::Map<String, serde_json::Value> = row
                    .iter()
                    .map(|(name, cell)| (name.to_string(), cell_json(cell)))
                    .collect();
                writeln!(out, "{}", serde_json::Value::Object(map))?;
            }
        }
    }
    Ok(())
}

/// Restrict rows to the named columns, in the given order.
pub fn select_columns(rows: Vec<Row>, columns: &[String]) -> Result<Vec<Row>, String> {
    rows.into_iter()
        .map(|row| {
            columns
                .iter()
                .map(|want| {
                    row.iter()
                        .find(|(name, _)| name == want)
                        .cloned()
                        .ok_or_else(|| {
                            let known: Vec<&str> = row.iter().map(|(n, _)| *n).collect();
                            format!("unknown column '{want}'; available: {}", known.join(", "))
                        })
                })
                .collect()
        })
        .collect()
}
