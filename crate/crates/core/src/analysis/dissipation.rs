use crate::error::{Error, Result};

use super::EnergyRecord;

/// Increase threshold below which a step still counts as dissipative.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationReport {
    pub holds: bool,
    /// Step of the first record whose energy rose by at least `tol`.
    pub first_violation_step: Option<u64>,
    /// Largest `E_n - E_{n-1}` over consecutive records.
    pub max_increase: f64,
    pub tol: f64,
}

/// Incremental form of [`check_dissipation`], fed one value at a time.
#[derive(Debug, Clone)]
pub struct DissipationWatch {
    tol: f64,
    last: Option<f64>,
    first_violation_step: Option<u64>,
    max_increase: f64,
    pairs: usize,
}

impl DissipationWatch {
    pub fn new(tol: f64) -> Self {
        DissipationWatch {
            tol,
            last: None,
            first_violation_step: None,
            max_increase: f64::NEG_INFINITY,
            pairs: 0,
        }
    }

    /// Feeds the energy for `step`; returns true if this step violates.
    pub fn push(&mut self, step: u64, energy: f64) -> bool {
        let mut violated = false;
        if let Some(prev) = self.last {
            let inc = energy - prev;
            self.pairs += 1;
            // NaN compares false: count it as a violation explicitly
            if inc.is_nan() || inc > self.max_increase {
                self.max_increase = if inc.is_nan() { f64::INFINITY } else { inc };
            }
            if inc.is_nan() || inc >= self.tol {
                violated = true;
                self.first_violation_step.get_or_insert(step);
            }
        }
        self.last = Some(energy);
        violated
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn report(&self) -> DissipationReport {
        DissipationReport {
            holds: self.first_violation_step.is_none(),
            first_violation_step: self.first_violation_step,
            max_increase: self.max_increase,
            tol: self.tol,
        }
    }
}

/// Scans consecutive records for an energy increase of at least `tol`.
///
/// With `use_modified`, every record must carry a modified energy.
pub fn check_dissipation(records: &[EnergyRecord], use_modified: bool, tol: f64) -> Result<DissipationReport> {
    if records.len() < 2 {
        return Err(Error::Records(format!(
            "need at least 2 records to check dissipation, got {}",
            records.len()
        )));
    }
    let mut watch = DissipationWatch::new(tol);
    for r in records {
        let e = if use_modified {
            r.modified_energy.ok_or_else(|| {
                Error::Records(format!("record at step {} has no modified energy", r.step))
            })?
        } else {
            r.energy
        };
        watch.push(r.step, e);
    }
    Ok(watch.report())
}
