//! Energy logs as CSV.
//!
//! Columns: `step,time,energy,modified_energy,mass,l2_norm,h2_seminorm,first_step_ratio`.
//! Floats carry 17 significant digits so values round-trip exactly; absent
//! optional values are empty cells.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::analysis::EnergyRecord;
use crate::error::{Error, Result};

pub const HEADER: [&str; 8] = [
    "step",
    "time",
    "energy",
    "modified_energy",
    "mass",
    "l2_norm",
    "h2_seminorm",
    "first_step_ratio",
];

/// Renders `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format {
            line,
            message: format!("{other:?}"),
        },
    }
}

pub fn write_energy_csv_to<W: Write>(w: W, records: &[EnergyRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER).map_err(csv_err)?;
    for r in records {
        out.write_record([
            r.step.to_string(),
            fmt_f64(r.time),
            fmt_f64(r.energy),
            fmt_opt(r.modified_energy),
            fmt_f64(r.mass),
            fmt_f64(r.l2_norm),
            fmt_f64(r.h2_seminorm),
            fmt_opt(r.first_step_ratio),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_energy_csv_from<R: Read>(r: R) -> Result<Vec<EnergyRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Format {
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |col: &str, v: &str| Error::Format {
            line,
            message: format!("column `{col}`: cannot parse {v:?}"),
        };
        let float = |i: usize| -> Result<f64> { row[i].parse::<f64>().map_err(|_| bad(HEADER[i], &row[i])) };
        let opt = |i: usize| -> Result<Option<f64>> {
            if row[i].is_empty() {
                Ok(None)
            } else {
                float(i).map(Some)
            }
        };
        records.push(EnergyRecord {
            step: row[0].parse().map_err(|_| bad("step", &row[0]))?,
            time: float(1)?,
            energy: float(2)?,
            modified_energy: opt(3)?,
            mass: float(4)?,
            l2_norm: float(5)?,
            h2_seminorm: float(6)?,
            first_step_ratio: opt(7)?,
        });
    }
    Ok(records)
}

pub fn write_energy_csv(records: &[EnergyRecord], path: impl AsRef<Path>) -> Result<()> {
    write_energy_csv_to(File::create(path)?, records)
}

pub fn read_energy_csv(path: impl AsRef<Path>) -> Result<Vec<EnergyRecord>> {
    read_energy_csv_from(File::open(path)?)
}
