//! Rendering and writing of command results.
//!
//! Every output carries a provenance record: a `# {json}` comment line on
//! top of CSV, a `"provenance"` key in JSON. Numbers are printed with 12
//! significant digits so identical inputs give byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::Failure;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub device_sha256: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Bool(bool),
    Empty,
}

impl Cell {
    /// `None` and NaN both render as an empty field.
    pub fn opt(x: Option<f64>) -> Cell {
        match x {
            Some(v) if !v.is_nan() => Cell::Num(v),
            _ => Cell::Empty,
        }
    }

    fn csv(self) -> String {
        match self {
            Cell::Num(x) => fmt_num(x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(self) -> Value {
        match self {
            Cell::Num(x) => num(x),
            Cell::Int(i) => Value::from(i),
            Cell::Bool(b) => Value::Bool(b),
            Cell::Empty => Value::Null,
        }
    }
}

pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

pub enum Rendered {
    Table(Table),
    Record(Map<String, Value>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn fmt_num(x: f64) -> String {
    // adding zero folds -0.0 into 0.0
    let x = x + 0.0;
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

/// JSON number rounded to 12 significant digits; non-finite becomes null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = fmt_num(x).parse().unwrap_or(x);
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

pub fn render(out: Rendered, format: Format, prov: &Provenance) -> Result<Vec<u8>, Failure> {
    match (out, format) {
        (Rendered::Table(t), Format::Csv) => table_csv(&t, prov),
        (Rendered::Table(t), Format::Json) => {
            let rows = t
                .rows
                .iter()
                .map(|r| {
                    Value::Object(
                        t.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect(),
                    )
                })
                .collect();
            let mut m = Map::new();
            m.insert("provenance".into(), serde_json::to_value(prov).unwrap_or(Value::Null));
            m.insert("rows".into(), Value::Array(rows));
            json_bytes(Value::Object(m))
        }
        (Rendered::Record(mut m), Format::Json) => {
            m.insert("provenance".into(), serde_json::to_value(prov).unwrap_or(Value::Null));
            json_bytes(Value::Object(m))
        }
        (Rendered::Record(_), Format::Csv) => {
            Err(Failure::Usage("this command only writes JSON".into()))
        }
    }
}

fn table_csv(t: &Table, prov: &Provenance) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    let header = serde_json::to_string(prov).map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(buf, "# {header}").map_err(io)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
    w.write_record(t.columns).map_err(|e| Failure::Usage(e.to_string()))?;
    for row in &t.rows {
        w.write_record(row.iter().map(|c| c.csv())).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Failure::Usage(e.to_string()))
}

fn json_bytes(v: Value) -> Result<Vec<u8>, Failure> {
    let mut s = serde_json::to_vec_pretty(&v).map_err(|e| Failure::Usage(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

fn io(e: std::io::Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Writes to stdout, or to `path` through a temporary file in the same
/// directory that is renamed into place only once complete.
pub fn write(bytes: &[u8], path: Option<&Path>) -> Result<(), Failure> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(io);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let ctx = |e: std::io::Error| Failure::Usage(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(ctx)?;
    tmp.write_all(bytes).map_err(ctx)?;
    tmp.persist(path).map_err(|e| ctx(e.error))?;
    Ok(())
}
