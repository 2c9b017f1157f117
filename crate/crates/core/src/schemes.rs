//! Time discretization: first-order IMEX, BDF2 with an IMEX bootstrap step,
//! and run orchestration.
//!
//! Each step is a single diagonal solve of `(a + eta^2 Delta^2) h^{n+1} = rhs`.
//! The explicit flux term is evaluated pseudo-spectrally: gradients are formed
//! in Fourier space, the flux pointwise on the grid, and its divergence back in
//! Fourier space.

use std::ops::ControlFlow;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::EnergyRecord;
use crate::error::{invalid, Error, Result};
use crate::field::{RealField, VectorField};
use crate::grid::GridSpec;
use crate::models::{flux_with, potential_energy, ModelParams};
use crate::spectral::{integrate, norm_l2, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    #[serde(rename = "imex")]
    Imex1,
    #[serde(rename = "bdf2")]
    Bdf2,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Imex1 => "imex",
            SchemeKind::Bdf2 => "bdf2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub tau: f64,
    pub t_final: f64,
    /// Field snapshot period in steps; 0 disables snapshots.
    pub snapshot_every: u64,
    /// Energy record period in steps.
    pub record_every: u64,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind, tau: f64, t_final: f64) -> Result<Self> {
        let c = SchemeConfig {
            scheme,
            tau,
            t_final,
            snapshot_every: 0,
            record_every: 1,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid("tau", format!("must be finite and > 0 (got {})", self.tau)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid("t_final", format!("must be finite and > 0 (got {})", self.t_final)));
        }
        if self.record_every < 1 {
            return Err(invalid("record_every", "must be >= 1"));
        }
        if self.n_steps() < 1 {
            return Err(invalid(
                "t_final",
                format!("t_final / tau rounds to zero steps ({} / {})", self.t_final, self.tau),
            ));
        }
        Ok(())
    }

    /// `round(t_final / tau)`.
    pub fn n_steps(&self) -> u64 {
        (self.t_final / self.tau).round() as u64
    }

    /// Time actually reached after `n_steps()` steps.
    pub fn final_time(&self) -> f64 {
        self.n_steps() as f64 * self.tau
    }
}

/// Rolling state of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub h_curr: RealField,
    pub h_prev: Option<RealField>,
    pub step: u64,
    pub time: f64,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(invalid("tau", format!("must be finite and > 0 (got {tau})")))
    }
}

/// `div(flux(grad h))`, truncated by the 2/3 rule when the transform has it enabled.
pub fn explicit_term(spectral: &Spectral, params: &ModelParams, h: &RealField) -> Result<RealField> {
    let grad = spectral.spectral_gradient(h)?;
    let f = flux_with(spectral.exec(), params, &grad);
    f.vx.ensure_finite("flux")?;
    f.vy.ensure_finite("flux")?;
    let fx = spectral.forward_values(f.vx.values());
    let fy = spectral.forward_values(f.vy.values());
    Ok(spectral.field_from_coeffs(&spectral.divergence_coeffs(&fx, &fy)))
}

/// One step of `(h^{n+1} - h^n)/tau = -eta^2 Delta^2 h^{n+1} + div(flux(grad h^n))`.
pub fn imex_step(spectral: &Spectral, params: &ModelParams, tau: f64, h_n: &RealField) -> Result<RealField> {
    check_tau(tau)?;
    let div = explicit_term(spectral, params, h_n)?;
    let rhs = h_n.zip_map(&div, |h, d| h / tau + d);
    let next = spectral.solve_shifted_biharmonic(&rhs, 1.0 / tau, params.eta_sq)?;
    next.ensure_finite("imex_step result")?;
    Ok(next)
}

/// One step of
/// `(3h^{n+1} - 4h^n + h^{n-1})/(2tau) = -eta^2 Delta^2 h^{n+1} + 2 div f(grad h^n) - div f(grad h^{n-1})`.
pub fn bdf2_step(
    spectral: &Spectral,
    params: &ModelParams,
    tau: f64,
    h_n: &RealField,
    h_nm1: &RealField,
) -> Result<RealField> {
    check_tau(tau)?;
    h_n.ensure_same_grid(h_nm1)?;
    let d_n = explicit_term(spectral, params, h_n)?;
    let d_nm1 = explicit_term(spectral, params, h_nm1)?;
    let mut rhs = RealField::zeros(h_n.grid());
    for (i, r) in rhs.values_mut().iter_mut().enumerate() {
        let (a, b) = (h_n.values()[i], h_nm1.values()[i]);
        *r = (4.0 * a - b) / (2.0 * tau) + 2.0 * d_n.values()[i] - d_nm1.values()[i];
    }
    let next = spectral.solve_shifted_biharmonic(&rhs, 1.5 / tau, params.eta_sq)?;
    next.ensure_finite("bdf2_step result")?;
    Ok(next)
}

/// First BDF2 level, computed with one IMEX step.
pub fn bootstrap_first_step(spectral: &Spectral, params: &ModelParams, tau: f64, h0: &RealField) -> Result<RealField> {
    imex_step(spectral, params, tau, h0)
}

/// `0.1 (sin 3x sin 2y + sin 5x sin 5y)`.
pub fn initial_condition_trig(grid: GridSpec) -> RealField {
    RealField::from_fn(grid, |x, y| 0.1 * ((3.0 * x).sin() * (2.0 * y).sin() + (5.0 * x).sin() * (5.0 * y).sin()))
}

/// I.i.d. uniform values in `[-amplitude, amplitude]`, reproducible from `seed`.
pub fn initial_condition_random(grid: GridSpec, amplitude: f64, seed: u64) -> Result<RealField> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(invalid("amplitude", format!("must be finite and > 0 (got {amplitude})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len()).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
    RealField::from_values(grid, values)
}

/// Receives diagnostics while a run progresses.
pub trait DiagnosticsSink {
    /// Called for each emitted record; returning `Break` ends the run early.
    fn on_record(&mut self, _record: &EnergyRecord) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }

    fn on_snapshot(&mut self, _step: u64, _time: f64, _field: &RealField) -> Result<()> {
        Ok(())
    }
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl DiagnosticsSink for NullSink {}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub state: SimState,
    pub records: Vec<EnergyRecord>,
    /// Step at which non-finite values first appeared; records stop before it.
    pub blowup_step: Option<u64>,
    /// Step after which the sink asked to stop.
    pub stopped_at: Option<u64>,
    pub n_steps: u64,
    pub final_time: f64,
}

impl SimResult {
    pub fn blew_up(&self) -> bool {
        self.blowup_step.is_some()
    }
}

/// One time level with everything the next step and the diagnostics need.
struct Level {
    h: RealField,
    h_hat: Vec<Complex64>,
    div_hat: Vec<Complex64>,
    potential: f64,
}

impl Level {
    /// `None` when the level contains non-finite values.
    fn evaluate(sp: &Spectral, params: &ModelParams, h: RealField, h_hat: Vec<Complex64>) -> Option<Level> {
        if !h.is_finite() {
            return None;
        }
        let (gx_hat, gy_hat) = sp.gradient_coeffs(&h_hat);
        let grad = VectorField {
            vx: sp.field_from_coeffs(&gx_hat),
            vy: sp.field_from_coeffs(&gy_hat),
        };
        if !(grad.vx.is_finite() && grad.vy.is_finite()) {
            return None;
        }
        let potential = potential_energy(sp.exec(), params, &grad);
        let f = flux_with(sp.exec(), params, &grad);
        let div_hat = sp.divergence_coeffs(&sp.forward_values(f.vx.values()), &sp.forward_values(f.vy.values()));
        potential.is_finite().then_some(Level {
            h,
            h_hat,
            div_hat,
            potential,
        })
    }

    fn from_coeffs(sp: &Spectral, params: &ModelParams, h_hat: Vec<Complex64>) -> Option<Level> {
        let h = sp.field_from_coeffs(&h_hat);
        Self::evaluate(sp, params, h, h_hat)
    }
}

fn step_imex(sp: &Spectral, params: &ModelParams, tau: f64, cur: &Level) -> Vec<Complex64> {
    let a = 1.0 / tau;
    let kq = &sp.wavenumbers().kquad;
    cur.h_hat
        .iter()
        .zip(&cur.div_hat)
        .zip(kq)
        .map(|((&h, &d), &q)| (h * a + d) / (a + params.eta_sq * q))
        .collect()
}

fn step_bdf2(sp: &Spectral, params: &ModelParams, tau: f64, cur: &Level, prev: &Level) -> Vec<Complex64> {
    let a = 1.5 / tau;
    let half = 0.5 / tau;
    let kq = &sp.wavenumbers().kquad;
    (0..kq.len())
        .map(|i| {
            let rhs = (cur.h_hat[i] * 4.0 - prev.h_hat[i]) * half + cur.div_hat[i] * 2.0 - prev.div_hat[i];
            rhs / (a + params.eta_sq * kq[i])
        })
        .collect()
}

fn make_record(
    sp: &Spectral,
    params: &ModelParams,
    scheme: SchemeKind,
    tau: f64,
    step: u64,
    cur: &Level,
    prev: Option<&Level>,
) -> EnergyRecord {
    let wn = sp.wavenumbers();
    let quad = sp.weighted_energy(&cur.h_hat, |i| wn.kquad[i]);
    let energy = 0.5 * params.eta_sq * quad + cur.potential;
    let diff: Option<Vec<Complex64>> =
        prev.map(|p| cur.h_hat.iter().zip(&p.h_hat).map(|(a, b)| a - b).collect());
    let diff_l2_sq = diff.as_ref().map(|d| sp.weighted_energy(d, |_| 1.0));
    let modified_energy = match (scheme, &diff, diff_l2_sq) {
        (SchemeKind::Bdf2, Some(d), Some(l2)) => {
            let grad_sq = sp.weighted_energy(d, |i| wn.grad_symbol(i));
            Some(energy + l2 / (4.0 * tau) + 0.5 * grad_sq)
        }
        _ => None,
    };
    EnergyRecord {
        step,
        time: step as f64 * tau,
        energy,
        modified_energy,
        mass: integrate(&cur.h),
        l2_norm: norm_l2(&cur.h),
        h2_seminorm: quad.sqrt(),
        first_step_ratio: if step == 1 { diff_l2_sq.map(|v| v / tau) } else { None },
    }
}

/// Advances `h0` by `config.n_steps()` steps.
///
/// Records are emitted at step 0, every `record_every` steps and at the final
/// step. Non-finite values end the run with `blowup_step` set rather than an
/// error.
pub fn run_simulation(
    spectral: &Spectral,
    params: &ModelParams,
    config: &SchemeConfig,
    h0: &RealField,
    sink: &mut dyn DiagnosticsSink,
) -> Result<SimResult> {
    config.validate()?;
    params.validate()?;
    if h0.grid() != spectral.grid() {
        return Err(Error::GridMismatch("initial field is not on the solver grid".into()));
    }
    h0.ensure_finite("initial condition")?;
    let tau = config.tau;
    let n_steps = config.n_steps();

    let mut cur = Level::evaluate(spectral, params, h0.clone(), spectral.forward_values(h0.values()))
        .ok_or(Error::NonFinite {
            what: "initial gradient",
            index: 0,
        })?;
    let mut prev: Option<Level> = None;
    let mut records = Vec::new();
    let mut blowup_step = None;
    let mut stopped_at = None;
    let mut step = 0u64;

    let first = make_record(spectral, params, config.scheme, tau, 0, &cur, None);
    records.push(first);
    if config.snapshot_every > 0 {
        sink.on_snapshot(0, 0.0, &cur.h)?;
    }
    if sink.on_record(&first).is_break() {
        stopped_at = Some(0);
    }

    while stopped_at.is_none() && step < n_steps {
        let next_hat = match (config.scheme, &prev) {
            (SchemeKind::Bdf2, Some(p)) => step_bdf2(spectral, params, tau, &cur, p),
            _ => step_imex(spectral, params, tau, &cur),
        };
        let Some(next) = Level::from_coeffs(spectral, params, next_hat) else {
            blowup_step = Some(step + 1);
            break;
        };
        prev = Some(std::mem::replace(&mut cur, next));
        step += 1;

        if step.is_multiple_of(config.record_every) || step == n_steps {
            let rec = make_record(spectral, params, config.scheme, tau, step, &cur, prev.as_ref());
            if !(rec.energy.is_finite() && rec.h2_seminorm.is_finite() && rec.l2_norm.is_finite()) {
                blowup_step = Some(step);
                break;
            }
            records.push(rec);
            if sink.on_record(&rec).is_break() {
                stopped_at = Some(step);
            }
        }
        if config.snapshot_every > 0 && step.is_multiple_of(config.snapshot_every) {
            sink.on_snapshot(step, step as f64 * tau, &cur.h)?;
        }
    }

    Ok(SimResult {
        state: SimState {
            h_curr: cur.h,
            h_prev: prev.map(|p| p.h),
            step,
            time: step as f64 * tau,
        },
        records,
        blowup_step,
        stopped_at,
        n_steps,
        final_time: config.final_time(),
    })
}
