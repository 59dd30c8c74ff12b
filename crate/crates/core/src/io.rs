//! Point-set CSV files: one point per row, no header, optionally followed by a
//! `+1`/`-1` label column.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::domain::{Label, LabeledExample, Point};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("row {row}: cannot parse {value:?} as a number")]
    BadNumber { row: usize, value: String },
    #[error("row {row}: label must be +1 or -1, got {value:?}")]
    BadLabel { row: usize, value: String },
    #[error("row {row}: expected {expected} columns, got {got}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("row {row}: non-finite coordinate")]
    NonFinite { row: usize },
}

fn parse_rows<R: Read>(reader: R) -> Result<Vec<Vec<String>>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    let mut width = None;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let fields: Vec<String> = rec.iter().map(str::to_owned).collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(CsvError::Ragged { row, expected: w, got: fields.len() })
            }
            _ => {}
        }
        rows.push(fields);
    }
    Ok(rows)
}

fn parse_coords<T: Real>(row: usize, fields: &[String]) -> Result<Point<T>, CsvError> {
    let coords = fields
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CsvError::BadNumber { row, value: s.clone() })
                .and_then(|v| if v.is_finite() { Ok(T::of(v)) } else { Err(CsvError::NonFinite { row }) })
        })
        .collect::<Result<Vec<T>, _>>()?;
    Ok(Point(coords))
}

fn parse_label(row: usize, s: &str) -> Result<Label, CsvError> {
    match s {
        "1" | "+1" => Ok(Label::Pos),
        "-1" => Ok(Label::Neg),
        other => Err(CsvError::BadLabel { row, value: other.to_owned() }),
    }
}

pub fn read_points<T: Real, R: Read>(reader: R) -> Result<Vec<Point<T>>, CsvError> {
    parse_rows(reader)?.iter().enumerate().map(|(row, f)| parse_coords(row, f)).collect()
}

pub fn read_labeled<T: Real, R: Read>(reader: R) -> Result<Vec<LabeledExample<Point<T>>>, CsvError> {
    parse_rows(reader)?
        .iter()
        .enumerate()
        .map(|(row, f)| {
            let (last, coords) = f.split_last().ok_or(CsvError::Ragged { row, expected: 2, got: 0 })?;
            Ok(LabeledExample::new(parse_coords(row, coords)?, parse_label(row, last)?))
        })
        .collect()
}

pub fn read_points_file<T: Real>(path: impl AsRef<Path>) -> Result<Vec<Point<T>>, CsvError> {
    read_points(std::fs::File::open(path)?)
}

fn fmt_coord<T: Real>(v: T) -> String {
    // shortest round-trip representation
    format!("{}", v.as_f64())
}

pub fn write_points<T: Real, W: Write>(writer: W, points: &[Point<T>]) -> Result<(), CsvError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for p in points {
        w.write_record(p.iter().map(|&v| fmt_coord(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_labeled<T: Real, W: Write>(writer: W, examples: &[LabeledExample<Point<T>>]) -> Result<(), CsvError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for ex in examples {
        let mut rec: Vec<String> = ex.point.iter().map(|&v| fmt_coord(v)).collect();
        rec.push(format!("{:+}", ex.label.value()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
