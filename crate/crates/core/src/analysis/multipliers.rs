//! Fourier multipliers of the normalized two-step recurrence
//! `(3u^{n+1} - 4u^n + u^{n-1})/tau = -Delta^2 u^{n+1} + div f^n`.
//!
//! With `T = (3 + tau Delta^2)^{-1}` the recurrence reads
//! `u^{n+1} = 4T u^n - T u^{n-1} + tau T div f^n`, and the roots `T+`, `T-` of
//! `l^2 - 4T l + T = 0` split it into
//! `u^{n+1} - T- u^n = T+ (u^n - T- u^{n-1}) + tau T div f^n`.
//! Everything here acts on mean-zero fields; the `k = 0` entries are zero.
//!
//! The BDF2 stepper divides by `2 tau` instead of `tau`; the two forms map onto
//! each other by `tau -> 2 tau` together with `Delta^2 -> eta^2 Delta^2`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::grid::{GridSpec, WaveNumbers};
use crate::spectral::{Spectral, TORUS_AREA};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `(t_hat, t_plus, t_minus)` for one mode with `|k|^4 = kquad`.
pub fn mode_multipliers(tau: f64, kquad: f64) -> (f64, Complex64, Complex64) {
    let t = 1.0 / (3.0 + tau * kquad);
    if t >= 0.25 {
        let r = (t * t - 0.25 * t).max(0.0).sqrt();
        (t, Complex64::new(2.0 * (t + r), 0.0), Complex64::new(2.0 * (t - r), 0.0))
    } else {
        let r = (0.25 * t - t * t).sqrt();
        (t, Complex64::new(2.0 * t, 2.0 * r), Complex64::new(2.0 * t, -2.0 * r))
    }
}

#[derive(Debug, Clone)]
pub struct MultiplierSpec {
    pub tau: f64,
    pub grid: GridSpec,
    /// `1 / (3 + tau |k|^4)` per mode in storage order (0 at `k = 0`).
    pub t_hat: Vec<f64>,
    pub t_plus: Vec<Complex64>,
    pub t_minus: Vec<Complex64>,
    /// Largest `|T+|`, `|T-|` over the nonzero modes.
    pub theta0: f64,
}

impl MultiplierSpec {
    /// Largest defects of `T+ + T- = 4 T` and `T+ T- = T` over nonzero modes.
    pub fn root_identity_defects(&self) -> (f64, f64) {
        let (mut sum, mut prod) = (0.0f64, 0.0f64);
        for idx in 1..self.t_hat.len() {
            let t = self.t_hat[idx];
            let (p, m) = (self.t_plus[idx], self.t_minus[idx]);
            sum = sum.max((p + m - 4.0 * t).norm());
            prod = prod.max((p * m - t).norm());
        }
        (sum, prod)
    }

    /// Largest `| |T+-| - sqrt(t_hat) |` over complex-branch modes; `None` if
    /// no mode is on that branch.
    pub fn complex_modulus_defect(&self) -> Option<f64> {
        let mut worst: Option<f64> = None;
        for idx in 1..self.t_hat.len() {
            let t = self.t_hat[idx];
            if t < 0.25 {
                let d = (self.t_plus[idx].norm() - t.sqrt())
                    .abs()
                    .max((self.t_minus[idx].norm() - t.sqrt()).abs());
                worst = Some(worst.map_or(d, |w| w.max(d)));
            }
        }
        worst
    }
}

pub fn build_multipliers(tau: f64, grid: GridSpec) -> Result<MultiplierSpec> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("must be finite and > 0 (got {tau})")));
    }
    let wn = WaveNumbers::new(grid);
    let n = grid.len();
    let mut t_hat = vec![0.0; n];
    let mut t_plus = vec![ZERO; n];
    let mut t_minus = vec![ZERO; n];
    let mut theta0: f64 = 0.0;
    for idx in 1..n {
        let (t, p, m) = mode_multipliers(tau, wn.kquad[idx]);
        t_hat[idx] = t;
        t_plus[idx] = p;
        t_minus[idx] = m;
        theta0 = theta0.max(p.norm()).max(m.norm());
    }
    Ok(MultiplierSpec {
        tau,
        grid,
        t_hat,
        t_plus,
        t_minus,
        theta0,
    })
}

#[derive(Debug, Clone)]
pub struct Theta0Certificate {
    pub tau0: f64,
    pub taus: Vec<f64>,
    pub theta0: Vec<f64>,
    /// `theta0` never increases along the sampled `taus`.
    pub monotone: bool,
    /// Largest sampled `theta0`; below 1 certifies the bound on `[tau0, tau_max]`.
    pub max_theta0: f64,
}

/// Samples `theta0(tau)` on a log-spaced grid over `[tau0, tau_max]`.
pub fn certify_theta0_uniform(tau0: f64, tau_max: f64, samples: usize, grid: GridSpec) -> Result<Theta0Certificate> {
    if !(tau0 > 0.0 && tau_max >= tau0 && samples >= 2) {
        return Err(invalid("tau0", "need 0 < tau0 <= tau_max and at least 2 samples"));
    }
    let ratio = (tau_max / tau0).ln();
    let taus: Vec<f64> = (0..samples)
        .map(|i| tau0 * (ratio * i as f64 / (samples - 1) as f64).exp())
        .collect();
    let theta0 = taus
        .iter()
        .map(|&t| build_multipliers(t, grid).map(|m| m.theta0))
        .collect::<Result<Vec<_>>>()?;
    let monotone = theta0.windows(2).all(|w| w[1] <= w[0]);
    let max_theta0 = theta0.iter().cloned().fold(0.0, f64::max);
    Ok(Theta0Certificate {
        tau0,
        taus,
        theta0,
        monotone,
        max_theta0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceSpec {
    pub tau: f64,
    pub grid: GridSpec,
    pub n_steps: usize,
    pub seed: u64,
    /// Bound `A0` on `||f^n||_2`; 0 runs the unforced recurrence.
    pub forcing: f64,
    /// Start from `u^0 = u^1 = 0` instead of random mean-zero data.
    pub zero_start: bool,
}

#[derive(Debug, Clone)]
pub struct RecurrenceReport {
    pub theta0: f64,
    /// `||u^{n+1} - T- u^n||_2` for `n = 0..=n_steps`.
    pub residuals: Vec<f64>,
    /// `||u^n||_2` for `n = 0..=n_steps + 1`.
    pub norms: Vec<f64>,
    /// Largest `||w^n|| - (theta0 ||w^{n-1}|| + A0)`; non-positive when every step contracts.
    pub max_step_excess: f64,
    pub contraction_ok: bool,
    /// Unforced runs: `||w^n|| <= theta0^n ||w^0||` at every step.
    pub decay_ok: bool,
    /// Telescoped bound `(||w^0|| + A0/(1-theta0))/(1-theta0) + ||u^0||`.
    pub telescoped_bound: f64,
    pub sup_norm: f64,
    pub bound_ok: bool,
}

impl RecurrenceReport {
    pub fn passed(&self) -> bool {
        self.contraction_ok && self.decay_ok && self.bound_ok
    }
}

fn coeff_norm(c: &[Complex64]) -> f64 {
    (TORUS_AREA * c.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// Smooth random mean-zero coefficients.
fn random_mean_zero(sp: &Spectral, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let g = sp.grid();
    let values: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut c = sp.forward_values(&values);
    let ksq = &sp.wavenumbers().ksq;
    for (v, &s) in c.iter_mut().zip(ksq) {
        *v /= 1.0 + s;
    }
    c[0] = ZERO;
    c
}

/// Iterates the normalized recurrence spectrally and checks the contraction
/// estimate at every step.
pub fn verify_recurrence_contraction(spec: &RecurrenceSpec) -> Result<RecurrenceReport> {
    let m = build_multipliers(spec.tau, spec.grid)?;
    if !(spec.forcing >= 0.0 && spec.forcing.is_finite()) {
        return Err(invalid("forcing", "must be finite and >= 0"));
    }
    let sp = Spectral::new(spec.grid);
    let wn = sp.wavenumbers();
    let ny = spec.grid.ny();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.grid.len();

    let (mut u_prev, mut u_cur) = if spec.zero_start {
        (vec![ZERO; n], vec![ZERO; n])
    } else {
        (random_mean_zero(&sp, &mut rng), random_mean_zero(&sp, &mut rng))
    };
    let t_minus_apply = |u: &[Complex64]| -> Vec<Complex64> { u.iter().zip(&m.t_minus).map(|(a, b)| a * b).collect() };
    let residual = |next: &[Complex64], cur: &[Complex64]| -> f64 {
        let tm = t_minus_apply(cur);
        coeff_norm(&next.iter().zip(&tm).map(|(a, b)| a - b).collect::<Vec<_>>())
    };

    let a0 = spec.forcing;
    let theta = m.theta0;
    let mut residuals = vec![residual(&u_cur, &u_prev)];
    let mut norms = vec![coeff_norm(&u_prev), coeff_norm(&u_cur)];
    let mut max_step_excess = f64::NEG_INFINITY;
    let mut decay_ok = true;
    let w0 = residuals[0];

    for step in 1..=spec.n_steps {
        // tau T div f^n with ||f^n||_2 = A0
        let forcing: Vec<Complex64> = if a0 > 0.0 {
            let fx: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let fy: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let (fx_hat, fy_hat) = (sp.forward_values(&fx), sp.forward_values(&fy));
            let norm = (coeff_norm(&fx_hat).powi(2) + coeff_norm(&fy_hat).powi(2)).sqrt();
            let scale = a0 / norm;
            (0..n)
                .map(|idx| {
                    let d = Complex64::new(0.0, 1.0)
                        * (wn.kx_odd[idx / ny] * fx_hat[idx] + wn.ky_odd[idx % ny] * fy_hat[idx]);
                    d * (scale * spec.tau * m.t_hat[idx])
                })
                .collect()
        } else {
            vec![ZERO; n]
        };
        let next: Vec<Complex64> = (0..n)
            .map(|idx| {
                let t = m.t_hat[idx];
                u_cur[idx] * (4.0 * t) - u_prev[idx] * t + forcing[idx]
            })
            .collect();
        let w = residual(&next, &u_cur);
        let prev_w = *residuals.last().expect("non-empty");
        max_step_excess = max_step_excess.max(w - (theta * prev_w + a0));
        if a0 == 0.0 && w > theta.powi(step as i32) * w0 * (1.0 + 1e-12) + 1e-300 {
            decay_ok = false;
        }
        residuals.push(w);
        norms.push(coeff_norm(&next));
        u_prev = std::mem::replace(&mut u_cur, next);
    }

    let telescoped_bound = (w0 + a0 / (1.0 - theta)) / (1.0 - theta) + norms[0];
    let sup_norm = norms.iter().cloned().fold(0.0, f64::max);
    let slack = 1e-12 * telescoped_bound.max(1.0);
    Ok(RecurrenceReport {
        theta0: theta,
        residuals,
        norms,
        max_step_excess,
        contraction_ok: max_step_excess <= 1e-12 * w0.max(a0).max(1e-300),
        decay_ok,
        telescoped_bound,
        sup_norm,
        bound_ok: theta < 1.0 && sup_norm <= telescoped_bound + slack,
    })
}
