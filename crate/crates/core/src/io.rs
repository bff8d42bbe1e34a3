//! CSV dataset and JSON report serialization.
//!
//! CSV format: UTF-8, comma-separated, header `k,u,y` with an optional
//! trailing `y_star` column, one sample per row, `k` counting up from
//! zero. Values are written with 17 significant digits so a round trip
//! through text reproduces every f64 bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{DataSet, IdentificationReport};

/// A parsed record file: the identification channels plus the
/// noise-free output when the file carries one.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub data: DataSet,
    pub y_star: Option<Vec<f64>>,
}

/// 17 significant digits: enough for any f64 to survive a text round
/// trip bit-exactly.
fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, data: &DataSet, y_star: Option<&[f64]>) -> Result<()> {
    if let Some(s) = y_star {
        if s.len() != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "y_star has {} samples, data has {}",
                s.len(),
                data.len()
            )));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    match y_star {
        Some(_) => writeln!(w, "k,u,y,y_star")?,
        None => writeln!(w, "k,u,y")?,
    }
    for k in 0..data.len() {
        write!(
            w,
            "{k},{},{}",
            full_precision(data.u[k]),
            full_precision(data.y[k])
        )?;
        if let Some(s) = y_star {
            write!(w, ",{}", full_precision(s[k]))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<CsvRecord> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(File::open(path)?));

    let headers = reader
        .headers()
        .map_err(|e| Error::CsvParse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let columns: Vec<&str> = headers.iter().collect();
    let with_star = match columns.as_slice() {
        ["k", "u", "y"] => false,
        ["k", "u", "y", "y_star"] => true,
        other => {
            return Err(Error::CsvParse {
                line: 1,
                msg: format!("expected header k,u,y[,y_star], got {}", other.join(",")),
            })
        }
    };

    let mut u = Vec::new();
    let mut y = Vec::new();
    let mut y_star = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| Error::CsvParse {
            line,
            msg: e.to_string(),
        })?;
        let want = if with_star { 4 } else { 3 };
        if record.len() != want {
            return Err(Error::CsvParse {
                line,
                msg: format!("expected {want} fields, got {}", record.len()),
            });
        }
        let field = |i: usize, name: &str| -> Result<f64> {
            record[i].parse::<f64>().map_err(|_| Error::CsvParse {
                line,
                msg: format!("column {name}: {:?} is not a number", &record[i]),
            })
        };
        let k: usize = record[0].parse().map_err(|_| Error::CsvParse {
            line,
            msg: format!("column k: {:?} is not an index", &record[0]),
        })?;
        if k != idx {
            return Err(Error::CsvParse {
                line,
                msg: format!("sample index {k} out of order, expected {idx}"),
            });
        }
        u.push(field(1, "u")?);
        y.push(field(2, "y")?);
        if with_star {
            y_star.push(field(3, "y_star")?);
        }
    }
    if u.is_empty() {
        return Err(Error::CsvParse {
            line: 2,
            msg: "file contains a header but no samples".into(),
        });
    }
    Ok(CsvRecord {
        data: DataSet::new(u, y)?,
        y_star: if with_star { Some(y_star) } else { None },
    })
}

pub fn write_report(path: &Path, report: &IdentificationReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<IdentificationReport> {
    let r = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(r)?)
}
