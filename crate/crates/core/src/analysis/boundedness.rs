use crate::error::{Error, Result};

use super::EnergyRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundednessSummary {
    pub sup_l2: f64,
    pub sup_h2: f64,
    /// `sup (||h||_2 + ||Delta h||_2)`.
    pub sup_sum: f64,
    /// Least-squares slope of `||h||_2` per step over the final half of the records.
    pub trend: f64,
    /// False when any norm is non-finite.
    pub finite: bool,
}

pub fn boundedness_monitor(records: &[EnergyRecord]) -> Result<BoundednessSummary> {
    if records.len() < 10 {
        return Err(Error::Records(format!(
            "boundedness monitor needs at least 10 records, got {}",
            records.len()
        )));
    }
    let mut sup_l2 = f64::NEG_INFINITY;
    let mut sup_h2 = f64::NEG_INFINITY;
    let mut sup_sum = f64::NEG_INFINITY;
    let mut finite = true;
    for r in records {
        finite &= r.l2_norm.is_finite() && r.h2_seminorm.is_finite();
        sup_l2 = sup_l2.max(r.l2_norm);
        sup_h2 = sup_h2.max(r.h2_seminorm);
        sup_sum = sup_sum.max(r.l2_norm + r.h2_seminorm);
    }
    if !finite {
        return Ok(BoundednessSummary {
            sup_l2: f64::INFINITY,
            sup_h2: f64::INFINITY,
            sup_sum: f64::INFINITY,
            trend: f64::NAN,
            finite,
        });
    }
    let tail = &records[records.len() / 2..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|r| r.step as f64).sum::<f64>() / n;
    let my = tail.iter().map(|r| r.l2_norm).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for r in tail {
        let dx = r.step as f64 - mx;
        sxy += dx * (r.l2_norm - my);
        sxx += dx * dx;
    }
    let trend = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(BoundednessSummary {
        sup_l2,
        sup_h2,
        sup_sum,
        trend,
        finite,
    })
}
