//! Tabular output in versioned CSV or JSON.
//!
//! A CSV file starts with `# dismet:<kind>:v<version>`, then one header
//! row. Floats are written with 17 significant digits so that a reader gets
//! back the exact value.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("unknown format `{other}` (csv, json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Flag(bool),
    Missing,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => u8::from(*b).to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Flag(b) => Value::from(*b),
            Cell::Missing => Value::Null,
        }
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(kind: &'static str, columns: &[&'static str]) -> Self {
        Self {
            kind,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("writing to memory");
        }
        let body = String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8");
        format!("# dismet:{}:v{SCHEMA_VERSION}\n{body}", self.kind)
    }

    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => json_text(&self.to_json_value()),
        }
    }
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialise");
    s.push('\n');
    s
}

/// Writes to `path`, or stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .or_else(|e| match e.kind() {
                    // A closed reader (`| head`) is not a failure.
                    std::io::ErrorKind::BrokenPipe => Ok(()),
                    _ => Err(CliError::io(Path::new("<stdout>"), e)),
                })
        }
    }
}

/// A CSV table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadTable {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ReadTable {
    pub fn column(&self, name: &str) -> CliResult<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Config(format!("{} table has no `{name}` column", self.kind)))
    }

    #[cfg(test)]
    pub fn floats(&self, name: &str) -> CliResult<Vec<f64>> {
        let i = self.column(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| parse_float(&row[i]).map_err(|_| {
                CliError::Config(format!("row {}: `{name}` = `{}` is not a number", r + 1, row[i]))
            }))
            .collect()
    }
}

/// Empty cells read as NaN.
pub fn parse_float(s: &str) -> Result<f64, std::num::ParseFloatError> {
    if s.is_empty() {
        Ok(f64::NAN)
    } else {
        s.parse()
    }
}

pub fn read_table(path: &Path) -> CliResult<ReadTable> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_table(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_table(text: &str) -> CliResult<ReadTable> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let tag = first
        .trim_end_matches('\r')
        .strip_prefix("# dismet:")
        .ok_or_else(|| CliError::Config("missing `# dismet:<kind>:v<version>` schema line".into()))?;
    let (kind, version) = tag
        .rsplit_once(":v")
        .ok_or_else(|| CliError::Config(format!("malformed schema line `{first}`")))?;
    if version.parse::<u32>().ok() != Some(SCHEMA_VERSION) {
        return Err(CliError::Config(format!(
            "unsupported {kind} schema version `{version}` (this build reads v{SCHEMA_VERSION})"
        )));
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let columns: Vec<String> = r
        .headers()
        .map_err(|e| CliError::Config(format!("bad header row: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.map(|rec| rec.iter().map(str::to_string).collect())
                .map_err(|e| CliError::Config(format!("bad row: {e}")))
        })
        .collect::<CliResult<Vec<Vec<String>>>>()?;
    Ok(ReadTable {
        kind: kind.to_string(),
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert!(parse_float(&format_float(f64::NAN)).unwrap().is_nan());
    }

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new("demo", &["a", "b", "c"]);
        t.push(vec![Cell::Float(0.1), Cell::Text("x,y".into()), Cell::Missing]);
        t.push(vec![Cell::Int(-3), Cell::Flag(true), Cell::Float(f64::NAN)]);
        let text = t.to_csv();
        assert!(text.starts_with("# dismet:demo:v1\na,b,c\n"));
        let back = parse_table(&text).unwrap();
        assert_eq!(back.kind, "demo");
        assert_eq!(back.rows[0][1], "x,y");
        assert_eq!(back.floats("a").unwrap()[0], 0.1);
        assert!(back.floats("c").unwrap()[0].is_nan());
    }

    #[test]
    fn rejects_unknown_versions() {
        assert!(parse_table("# dismet:demo:v2\na\n1\n").is_err());
        assert!(parse_table("a\n1\n").is_err());
        assert!(parse_table("").is_err());
    }

    #[test]
    fn json_uses_null_for_missing() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec![Cell::Float(f64::NAN), Cell::Missing]);
        assert_eq!(t.to_json_value()[0]["a"], Value::Null);
    }
}
