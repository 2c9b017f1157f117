//! Critical time-step search.
//!
//! `tau_c` is the supremum of time steps for which no recorded energy rises by
//! `tol` or more up to `t_final`. Each probe is a full run from the same initial
//! datum; probes stop at the first violation since the verdict cannot change
//! after it.

use std::ops::ControlFlow;

use crate::error::{invalid, Result};
use crate::exec;
use crate::field::RealField;
use crate::models::ModelParams;
use crate::schemes::{run_simulation, DiagnosticsSink, SchemeConfig, SchemeKind};
use crate::spectral::Spectral;

use super::{DissipationReport, DissipationWatch, EnergyRecord};

/// Bisection stops once the bracket is narrower than this fraction of `tau_lo`.
const REFINE_REL_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub params: ModelParams,
    pub scheme: SchemeKind,
    pub t_final: f64,
    /// Strictly increasing coarse grid of time steps.
    pub tau_list: Vec<f64>,
    pub refine_iters: usize,
    pub tol: f64,
    /// Test the BDF2 modified energy instead of the plain energy.
    pub use_modified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepProbe {
    pub tau: f64,
    pub report: DissipationReport,
    pub blowup_step: Option<u64>,
    /// Last step simulated (less than `n_steps` if the probe stopped early).
    pub steps_run: u64,
    pub n_steps: u64,
    /// Largest `|mean(h^n) - mean(h^0)|` over the simulated steps.
    pub max_mean_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Largest probed step below which everything held; `None` if the first probe failed.
    pub tau_lo: Option<f64>,
    /// Smallest failing probe; `None` if every probe held.
    pub tau_hi: Option<f64>,
    /// All probes, sorted by `tau`.
    pub trace: Vec<SweepProbe>,
}

impl SweepResult {
    pub fn is_closed(&self) -> bool {
        self.tau_lo.is_some() && self.tau_hi.is_some()
    }
}

struct WatchSink {
    watch: DissipationWatch,
    use_modified: bool,
    mean0: Option<f64>,
    max_mean_drift: f64,
}

impl DiagnosticsSink for WatchSink {
    fn on_record(&mut self, r: &EnergyRecord) -> ControlFlow<()> {
        let m0 = *self.mean0.get_or_insert(r.mean());
        self.max_mean_drift = self.max_mean_drift.max((r.mean() - m0).abs());
        let e = if self.use_modified {
            match r.modified_energy {
                Some(e) => e,
                None => return ControlFlow::Continue(()),
            }
        } else {
            r.energy
        };
        if self.watch.push(r.step, e) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }
}

/// Runs one simulation at `tau` and reports whether the energy dissipated.
#[allow(clippy::too_many_arguments)]
pub fn probe_tau(
    spectral: &Spectral,
    params: &ModelParams,
    scheme: SchemeKind,
    h0: &RealField,
    t_final: f64,
    tau: f64,
    tol: f64,
    use_modified: bool,
) -> Result<SweepProbe> {
    let config = SchemeConfig {
        scheme,
        tau,
        t_final,
        snapshot_every: 0,
        record_every: 1,
    };
    let mut sink = WatchSink {
        watch: DissipationWatch::new(tol),
        use_modified,
        mean0: None,
        max_mean_drift: 0.0,
    };
    let res = run_simulation(spectral, params, &config, h0, &mut sink)?;
    let mut report = sink.watch.report();
    if let Some(step) = res.blowup_step {
        report.holds = false;
        report.first_violation_step.get_or_insert(step);
        report.max_increase = f64::INFINITY;
    }
    Ok(SweepProbe {
        tau,
        report,
        blowup_step: res.blowup_step,
        steps_run: res.state.step,
        n_steps: res.n_steps,
        max_mean_drift: sink.max_mean_drift,
    })
}

/// Brackets `tau_c` on `tau_list`, then bisects up to `refine_iters` times.
///
/// Coarse probes are independent and run concurrently under the transform's
/// execution policy.
pub fn find_tau_c(spectral: &Spectral, spec: &SweepSpec, h0: &RealField) -> Result<SweepResult> {
    if spec.tau_list.is_empty() {
        return Err(invalid("tau_list", "must not be empty"));
    }
    if spec.tau_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("tau_list", "must be strictly increasing"));
    }
    if spec.tau_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(invalid("tau_list", "entries must be finite and > 0"));
    }
    let probe = |tau: f64| {
        probe_tau(
            spectral,
            &spec.params,
            spec.scheme,
            h0,
            spec.t_final,
            tau,
            spec.tol,
            spec.use_modified,
        )
    };
    let mut trace = exec::map_slice(spectral.exec(), &spec.tau_list, |&t| probe(t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let first_fail = trace.iter().position(|p| !p.report.holds);
    let (mut lo, mut hi) = match first_fail {
        None => (trace.last().map(|p| p.tau), None),
        Some(0) => (None, Some(trace[0].tau)),
        Some(i) => (Some(trace[i - 1].tau), Some(trace[i].tau)),
    };

    if let (Some(l), Some(h)) = (lo.as_mut(), hi.as_mut()) {
        for _ in 0..spec.refine_iters {
            if *h - *l < REFINE_REL_WIDTH * *l {
                break;
            }
            let mid = 0.5 * (*l + *h);
            let p = probe(mid)?;
            if p.report.holds {
                *l = mid;
            } else {
                *h = mid;
            }
            trace.push(p);
        }
    }
    trace.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    Ok(SweepResult {
        tau_lo: lo,
        tau_hi: hi,
        trace,
    })
}
