//! Binary field snapshots.
//!
//! Layout (all little-endian):
//!
//! | bytes | content                         |
//! |-------|---------------------------------|
//! | 4     | magic `MBEF`                    |
//! | 4     | format version (`u32`, = 1)     |
//! | 4     | `nx` (`u32`)                    |
//! | 4     | `ny` (`u32`)                    |
//! | 8     | time (`f64`)                    |
//! | 8     | step (`u64`)                    |
//! | 8·nx·ny | values (`f64`), row-major, x index as row |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::grid::GridSpec;

pub const MAGIC: [u8; 4] = *b"MBEF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: RealField,
    pub time: f64,
    pub step: u64,
}

pub fn write_snapshot_to<W: Write>(mut w: W, field: &RealField, time: f64, step: u64) -> Result<()> {
    let g = field.grid();
    let dim = |n: usize| u32::try_from(n).map_err(|_| Error::Snapshot(format!("dimension {n} exceeds u32")));
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(&MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.extend_from_slice(&dim(g.nx())?.to_le_bytes());
    header.extend_from_slice(&dim(g.ny())?.to_le_bytes());
    header.extend_from_slice(&time.to_le_bytes());
    header.extend_from_slice(&step.to_le_bytes());
    w.write_all(&header)?;
    let mut payload = Vec::with_capacity(8 * g.len());
    for v in field.values() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&payload)?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot_from<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Snapshot(format!("truncated header: {e}")))?;
    if header[0..4] != MAGIC {
        return Err(Error::Snapshot(format!("bad magic {:?}", &header[0..4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().expect("4 bytes"));
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let (nx, ny) = (u32_at(8) as usize, u32_at(12) as usize);
    let time = f64::from_le_bytes(header[16..24].try_into().expect("8 bytes"));
    let step = u64::from_le_bytes(header[24..32].try_into().expect("8 bytes"));
    let grid = GridSpec::new(nx, ny)?;
    let mut payload = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut payload).map_err(|e| {
        Error::Snapshot(format!("payload shorter than {} bytes: {e}", payload.len()))
    })?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Snapshot("trailing bytes after payload".into()));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Snapshot {
        field: RealField::from_values(grid, values)?,
        time,
        step,
    })
}

pub fn write_snapshot(path: impl AsRef<Path>, field: &RealField, time: f64, step: u64) -> Result<()> {
    write_snapshot_to(BufWriter::new(File::create(path)?), field, time, step)
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    read_snapshot_from(BufReader::new(File::open(path)?))
}
