//! CSV files: traces (`t,N,X,mass`), density snapshots (`s,n`) and
//! analytic profiles (`t,N`). Values are written with 13 significant digits.

use std::io::Write;
use std::path::Path;

use elapsed_neurons::solver::{ActivityTrace, DensitySnapshot};

use crate::error::{CliError, Result};

pub fn format_value(v: f64) -> String {
    format!("{v:.12e}")
}

/// Writes equally long columns under `headers`.
pub fn write_columns<W: Write>(out: W, headers: &[&str], columns: &[&[f64]]) -> csv::Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(headers)?;
    let mut record = Vec::with_capacity(columns.len());
    for k in 0..rows {
        record.clear();
        record.extend(columns.iter().map(|c| format_value(c[k])));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn write_file(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_columns(std::io::BufWriter::new(file), headers, columns)
        .map_err(|e| CliError::csv(path, e))
}

pub fn write_trace(path: &Path, trace: &ActivityTrace) -> Result<()> {
    write_file(
        path,
        &["t", "N", "X", "mass"],
        &[&trace.times, &trace.activity, &trace.input, &trace.mass],
    )
}

pub fn write_snapshot(path: &Path, snapshot: &DensitySnapshot) -> Result<()> {
    write_file(path, &["s", "n"], &[&snapshot.ages, &snapshot.values])
}

pub fn write_profile(path: &Path, times: &[f64], values: &[f64]) -> Result<()> {
    write_file(path, &["t", "N"], &[times, values])
}

/// A numeric CSV read back column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }
}

/// Reads a CSV of numbers with a header row.
pub fn read_table<R: std::io::Read>(input: R) -> std::result::Result<Table, String> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers: Vec<String> = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for (row, record) in r.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        for (j, field) in record.iter().enumerate() {
            let v = field.parse::<f64>().map_err(|_| {
                format!(
                    "row {} column `{}`: `{field}` is not a number",
                    row + 2,
                    headers[j]
                )
            })?;
            columns[j].push(v);
        }
    }
    Ok(Table { headers, columns })
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_table(std::io::BufReader::new(file))
        .map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
}
