use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub const COLUMNS: [&str; 10] = [
    "experiment",
    "n",
    "p",
    "layer",
    "gamma",
    "beta",
    "magnitude_sq",
    "residual",
    "wall_time",
    "status",
];

/// One output record. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultRow {
    pub experiment: String,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub layer: Option<usize>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub magnitude_sq: Option<f64>,
    pub residual: Option<f64>,
    pub wall_time: Option<f64>,
    pub status: String,
}

impl ResultRow {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            ..Default::default()
        }
    }
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn cells(row: &ResultRow) -> [String; 10] {
    let int = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    let float = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    [
        row.experiment.clone(),
        int(row.n),
        int(row.p),
        int(row.layer),
        float(row.gamma),
        float(row.beta),
        float(row.magnitude_sq),
        float(row.residual),
        float(row.wall_time),
        row.status.clone(),
    ]
}

fn json_row(row: &ResultRow) -> Value {
    let mut obj = Map::new();
    obj.insert("experiment".into(), Value::String(row.experiment.clone()));
    for (key, v) in [("n", row.n), ("p", row.p), ("layer", row.layer)] {
        obj.insert(key.into(), v.map_or(Value::Null, |x| Value::Number(x.into())));
    }
    for (key, v) in [
        ("gamma", row.gamma),
        ("beta", row.beta),
        ("magnitude_sq", row.magnitude_sq),
        ("residual", row.residual),
        ("wall_time", row.wall_time),
    ] {
        let value = match v {
            Some(x) if x.is_finite() => Value::Number(format_float(x).parse::<Number>().expect("valid number")),
            _ => Value::Null,
        };
        obj.insert(key.into(), value);
    }
    obj.insert("status".into(), Value::String(row.status.clone()));
    Value::Object(obj)
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, writer: W) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(writer);
            w.write_record(COLUMNS)?;
            for row in rows {
                w.write_record(cells(row))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut w = writer;
            let value = Value::Array(rows.iter().map(json_row).collect());
            serde_json::to_writer_pretty(&mut w, &value)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(rows: &[ResultRow], format: Format, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => write_rows(rows, format, BufWriter::new(File::create(p)?)),
        None => write_rows(rows, format, io::stdout().lock()),
    }
}
