//! Dataset files.
//!
//! CSV: one header row, one sample per line. An optional integer column named
//! `task` assigns samples to tasks (tasks are ordered by label); every other
//! column is a feature. JSON: `{"tasks": [[[x, ...], ...], ...]}`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::MultitaskDataset;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;

pub const TASK_COLUMN: &str = "task";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// Guesses the format from the file extension (`.json`, otherwise CSV).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

pub fn load_dataset(path: &Path, format: Option<DataFormat>) -> Result<MultitaskDataset> {
    let file = BufReader::new(File::open(path)?);
    match format.unwrap_or_else(|| DataFormat::from_path(path)) {
        DataFormat::Csv => read_csv(file),
        DataFormat::Json => read_json(file),
    }
}

pub fn read_csv(reader: impl Read) -> Result<MultitaskDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| parse_error(1, e.to_string()))?
        .clone();
    if header.is_empty() {
        return Err(parse_error(1, "empty header"));
    }
    let task_col = header.iter().position(|h| h == TASK_COLUMN);
    let width = header.len();
    let d = width - task_col.map_or(0, |_| 1);
    if d == 0 {
        return Err(parse_error(1, "no feature columns"));
    }

    let mut groups: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(parse_error(
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let mut label = 0;
        let mut row = Vec::with_capacity(d);
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == task_col {
                label = cell
                    .parse::<i64>()
                    .map_err(|_| parse_error(line, format!("task label {cell:?} is not an integer")))?;
            } else {
                let v = cell
                    .parse::<f64>()
                    .map_err(|_| parse_error(line, format!("column {:?}: {cell:?} is not a number", &header[j])))?;
                if !v.is_finite() {
                    return Err(parse_error(line, format!("column {:?}: non-finite value", &header[j])));
                }
                row.push(v);
            }
        }
        groups.entry(label).or_default().extend(row);
    }
    if groups.is_empty() {
        return Err(invalid("dataset has no samples"));
    }
    let sizes: Vec<usize> = groups.values().map(|g| g.len() / d).collect();
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(invalid(format!("tasks have unequal sample counts {sizes:?}")));
    }
    let tasks = groups
        .into_values()
        .map(|g| Matrix::new(g.len() / d, d, g))
        .collect::<Result<Vec<_>>>()?;
    MultitaskDataset::new(tasks)
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize)]
struct JsonDataset {
    tasks: Vec<Vec<Vec<f64>>>,
}

pub fn read_json(reader: impl Read) -> Result<MultitaskDataset> {
    let raw: JsonDataset = serde_json::from_reader(reader)?;
    let tasks = raw
        .tasks
        .iter()
        .enumerate()
        .map(|(t, rows)| {
            if rows.is_empty() {
                return Err(invalid(format!("task {t} has no samples")));
            }
            Matrix::from_rows(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    MultitaskDataset::new(tasks)
}

/// Writes CSV with `x0..x{d-1}` feature columns, and a `task` column when
/// there is more than one task. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_csv(data: &MultitaskDataset, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let multi = data.task_count() > 1;
    let mut header: Vec<String> = Vec::new();
    if multi {
        header.push(TASK_COLUMN.to_string());
    }
    header.extend((0..data.dim()).map(|j| format!("x{j}")));
    w.write_record(&header).map_err(csv_io)?;
    for (t, task) in data.tasks().iter().enumerate() {
        for row in task.row_iter() {
            let mut rec: Vec<String> = Vec::with_capacity(row.len() + 1);
            if multi {
                rec.push(t.to_string());
            }
            rec.extend(row.iter().map(|v| format!("{v:?}")));
            w.write_record(&rec).map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(data: &MultitaskDataset, writer: impl Write) -> Result<()> {
    let raw = JsonDataset {
        tasks: data
            .tasks()
            .iter()
            .map(|m| m.row_iter().map(<[f64]>::to_vec).collect())
            .collect(),
    };
    serde_json::to_writer(writer, &raw)?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("{other:?}")),
    }
}
