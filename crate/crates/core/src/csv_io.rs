//! CSV persistence for paths: header `time,value` (or `time,v1,v2,v3` for a
//! 3D path), one breakpoint per row.

use std::io::{Read, Write};

use thiserror::Error;

use crate::path::{Path, Path3, PathError};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("expected header {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
    #[error("row {row}: cannot parse {field:?} as a number")]
    Number { row: usize, field: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Width { row: usize, expected: usize, found: usize },
    #[error("column {0:?} not found")]
    MissingColumn(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

const PATH_HEADER: [&str; 2] = ["time", "value"];
const PATH3_HEADER: [&str; 4] = ["time", "v1", "v2", "v3"];

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_path<W: Write>(p: &Path, w: W) -> Result<(), CsvError> {
    let mut out = writer(w);
    out.write_record(PATH_HEADER)?;
    for (t, v) in p.times().iter().zip(p.values()) {
        out.write_record([t.to_string(), v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_path3<W: Write>(p: &Path3, w: W) -> Result<(), CsvError> {
    let mut out = writer(w);
    out.write_record(PATH3_HEADER)?;
    let [a, b, c] = p.components();
    for k in 0..a.len() {
        out.write_record([
            a.times()[k].to_string(),
            a.values()[k].to_string(),
            b.values()[k].to_string(),
            c.values()[k].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn read_columns<R: Read>(r: R, header: &[&str]) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(CsvError::Header { expected: header.iter().map(|s| s.to_string()).collect(), found });
    }
    let mut cols = vec![Vec::new(); header.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(CsvError::Width { row: row + 1, expected: header.len(), found: rec.len() });
        }
        for (col, field) in cols.iter_mut().zip(rec.iter()) {
            let v =
                field.trim().parse::<f64>().map_err(|_| CsvError::Number { row: row + 1, field: field.to_owned() })?;
            col.push(v);
        }
    }
    Ok(cols)
}

pub fn read_path<R: Read>(r: R) -> Result<Path, CsvError> {
    let mut cols = read_columns(r, &PATH_HEADER)?;
    let values = cols.pop().expect("two columns");
    let times = cols.pop().expect("two columns");
    Ok(Path::new(times, values)?)
}

pub fn read_path3<R: Read>(r: R) -> Result<Path3, CsvError> {
    let cols = read_columns(r, &PATH3_HEADER)?;
    let times = &cols[0];
    let comp = |i: usize| Path::new(times.clone(), cols[i].clone());
    Ok(Path3::new(comp(1)?, comp(2)?, comp(3)?)?)
}

/// All values of one named column of a headed CSV file.
pub fn read_column<R: Read>(r: R, column: &str) -> Result<Vec<f64>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let idx =
        rdr.headers()?.iter().position(|h| h == column).ok_or_else(|| CsvError::MissingColumn(column.to_owned()))?;
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = rec.get(idx).unwrap_or("");
        let v = field.trim().parse::<f64>().map_err(|_| CsvError::Number { row: row + 1, field: field.to_owned() })?;
        out.push(v);
    }
    Ok(out)
}
