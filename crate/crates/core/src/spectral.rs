//! Fourier machinery on the periodic torus.
//!
//! [`Spectral`] owns the FFT plans and symbol tables for one grid. Coefficients
//! are normalized so the `(0, 0)` entry equals the field mean; derivatives act
//! diagonally on them. First-derivative symbols vanish on the Nyquist lines so
//! derivatives of real fields stay real.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::exec::{self, block_sum, Exec};
use crate::field::{RealField, SpectralField, VectorField};
use crate::grid::{GridSpec, WaveNumbers};

/// Area of the torus `[-pi, pi]^2`.
pub const TORUS_AREA: f64 = 4.0 * PI * PI;

const HERMITIAN_TOL: f64 = 1e-10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

/// FFT plans, symbol tables and execution policy for one grid.
#[derive(Clone)]
pub struct Spectral {
    grid: GridSpec,
    wn: WaveNumbers,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    exec: Exec,
    dealias: Option<Vec<bool>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .field("exec", &self.exec)
            .field("dealias", &self.dealias.is_some())
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            grid,
            wn: WaveNumbers::new(grid),
            fwd_x: planner.plan_fft_forward(grid.nx()),
            inv_x: planner.plan_fft_inverse(grid.nx()),
            fwd_y: planner.plan_fft_forward(grid.ny()),
            inv_y: planner.plan_fft_inverse(grid.ny()),
            exec: Exec::default(),
            dealias: None,
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Enables 2/3-rule truncation of the explicit nonlinear term.
    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on.then(|| {
            let (nx, ny) = (self.grid.nx() as f64, self.grid.ny() as f64);
            let mut keep = Vec::with_capacity(self.grid.len());
            for &a in &self.wn.kx {
                for &b in &self.wn.ky {
                    keep.push(3.0 * a.abs() < nx && 3.0 * b.abs() < ny);
                }
            }
            keep
        });
        self
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn wavenumbers(&self) -> &WaveNumbers {
        &self.wn
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn dealias_enabled(&self) -> bool {
        self.dealias.is_some()
    }

    fn fft2(&self, buf: &mut [Complex64], dir: Direction) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let (fx, fy) = match dir {
            Direction::Forward => (&self.fwd_x, &self.fwd_y),
            Direction::Inverse => (&self.inv_x, &self.inv_y),
        };
        run_rows(self.exec, fy, buf, ny);
        let mut t = vec![ZERO; buf.len()];
        transpose(self.exec, buf, &mut t, nx, ny);
        run_rows(self.exec, fx, &mut t, nx);
        transpose(self.exec, &t, buf, ny, nx);
    }

    pub(crate) fn forward_values(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft2(&mut buf, Direction::Forward);
        let scale = 1.0 / self.grid.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Inverse transform keeping only the real part.
    pub(crate) fn inverse_real(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.fft2(&mut buf, Direction::Inverse);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub(crate) fn field_from_coeffs(&self, coeffs: &[Complex64]) -> RealField {
        RealField::from_values(self.grid, self.inverse_real(coeffs)).expect("grid-sized buffer")
    }

    /// Converts between DFT coefficients (origin at grid index 0) and Fourier
    /// coefficients of the torus with origin at `x = y = 0`. The map is its own
    /// inverse: the grid starts at `-pi`, so mode `k` picks up `(-1)^(k1+k2)`,
    /// and `k` has the parity of its FFT index.
    fn recentre(&self, coeffs: &mut [Complex64]) {
        let ny = self.grid.ny();
        for (idx, c) in coeffs.iter_mut().enumerate() {
            if (idx / ny + idx % ny) % 2 == 1 {
                *c = -*c;
            }
        }
    }

    /// Checked forward transform in DFT order, for operators that return to
    /// physical space.
    fn raw_forward(&self, f: &RealField) -> Result<Vec<Complex64>> {
        self.check_grid(f)?;
        f.ensure_finite("forward_transform input")?;
        Ok(self.forward_values(f.values()))
    }

    pub fn forward_transform(&self, f: &RealField) -> Result<SpectralField> {
        let mut c = self.raw_forward(f)?;
        self.recentre(&mut c);
        SpectralField::from_coeffs(self.grid, c)
    }

    pub fn inverse_transform(&self, spec: &SpectralField) -> Result<RealField> {
        if spec.grid() != self.grid {
            return Err(Error::GridMismatch("spectral field on a different grid".into()));
        }
        if let Some(index) = spec.coeffs().iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite {
                what: "inverse_transform input",
                index,
            });
        }
        let tol = HERMITIAN_TOL * spec.max_norm().max(1.0);
        let defect = spec.hermitian_defect();
        if defect > tol {
            return Err(Error::NotHermitian { defect, tol });
        }
        let mut c = spec.coeffs().to_vec();
        self.recentre(&mut c);
        Ok(self.field_from_coeffs(&c))
    }

    /// Coefficients of `(d/dx h, d/dy h)` given those of `h`.
    pub(crate) fn gradient_coeffs(&self, h_hat: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let ny = self.grid.ny();
        let gx = h_hat
            .iter()
            .enumerate()
            .map(|(idx, &c)| I * self.wn.kx_odd[idx / ny] * c)
            .collect();
        let gy = h_hat
            .iter()
            .enumerate()
            .map(|(idx, &c)| I * self.wn.ky_odd[idx % ny] * c)
            .collect();
        (gx, gy)
    }

    /// Coefficients of `d/dx vx + d/dy vy`, with the mean mode zeroed and the
    /// optional 2/3 truncation applied.
    pub(crate) fn divergence_coeffs(&self, vx_hat: &[Complex64], vy_hat: &[Complex64]) -> Vec<Complex64> {
        let ny = self.grid.ny();
        let mut out: Vec<Complex64> = vx_hat
            .iter()
            .zip(vy_hat)
            .enumerate()
            .map(|(idx, (&a, &b))| I * (self.wn.kx_odd[idx / ny] * a + self.wn.ky_odd[idx % ny] * b))
            .collect();
        out[0] = ZERO;
        if let Some(keep) = &self.dealias {
            for (c, &k) in out.iter_mut().zip(keep) {
                if !k {
                    *c = ZERO;
                }
            }
        }
        out
    }

    pub fn spectral_gradient(&self, h: &RealField) -> Result<VectorField> {
        let h_hat = self.raw_forward(h)?;
        let (gx, gy) = self.gradient_coeffs(&h_hat);
        VectorField::new(self.field_from_coeffs(&gx), self.field_from_coeffs(&gy))
    }

    pub fn spectral_divergence(&self, v: &VectorField) -> Result<RealField> {
        let vx = self.raw_forward(&v.vx)?;
        let vy = self.raw_forward(&v.vy)?;
        Ok(self.field_from_coeffs(&self.divergence_coeffs(&vx, &vy)))
    }

    fn apply_symbol(&self, h: &RealField, symbol: &[f64]) -> Result<RealField> {
        let mut c = self.raw_forward(h)?;
        for (v, &s) in c.iter_mut().zip(symbol) {
            *v *= s;
        }
        Ok(self.field_from_coeffs(&c))
    }

    pub fn spectral_laplacian(&self, h: &RealField) -> Result<RealField> {
        let neg: Vec<f64> = self.wn.ksq.iter().map(|s| -s).collect();
        self.apply_symbol(h, &neg)
    }

    pub fn spectral_bilaplacian(&self, h: &RealField) -> Result<RealField> {
        self.apply_symbol(h, &self.wn.kquad)
    }

    /// Solves `(a + b * Delta^2) u = rhs` mode by mode.
    pub fn solve_shifted_biharmonic(&self, rhs: &RealField, a: f64, b: f64) -> Result<RealField> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid("a", format!("must be finite and > 0 (got {a})")));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(invalid("b", format!("must be finite and >= 0 (got {b})")));
        }
        let mut c = self.raw_forward(rhs)?;
        for (v, &q) in c.iter_mut().zip(&self.wn.kquad) {
            *v /= a + b * q;
        }
        Ok(self.field_from_coeffs(&c))
    }

    /// `||Delta f||_2`.
    pub fn seminorm_h2(&self, f: &RealField) -> Result<f64> {
        Ok(norm_l2(&self.spectral_laplacian(f)?))
    }

    /// `4 pi^2 * sum_k w(k) |c(k)|^2`, the Parseval form of a weighted L2 norm.
    pub(crate) fn weighted_energy(&self, coeffs: &[Complex64], weight: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
        TORUS_AREA * block_sum(self.exec, coeffs.len(), self.grid.ny(), |idx| weight(idx) * coeffs[idx].norm_sqr())
    }

    fn check_grid(&self, f: &RealField) -> Result<()> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "field is {}x{}, transform is {}x{}",
                f.grid().nx(),
                f.grid().ny(),
                self.grid.nx(),
                self.grid.ny()
            )));
        }
        Ok(())
    }
}

fn run_rows(exec: Exec, fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64], row: usize) {
    let scratch_len = fft.get_inplace_scratch_len();
    if !exec.is_parallel() {
        let mut scratch = vec![ZERO; scratch_len];
        fft.process_with_scratch(buf, &mut scratch);
        return;
    }
    exec::chunks_mut_init(
        exec,
        buf,
        row,
        || vec![ZERO; scratch_len],
        |scratch, _, chunk| fft.process_with_scratch(chunk, scratch),
    );
}

/// `dst[j * rows + i] = src[i * cols + j]` for a `rows x cols` source.
fn transpose(exec: Exec, src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    exec::chunks_mut_init(exec, dst, rows, || (), |_, j, out| {
        for (i, v) in out.iter_mut().enumerate() {
            *v = src[i * cols + j];
        }
    });
}

/// Rectangle-rule integral over the torus (spectrally accurate for smooth periodic `f`).
pub fn integrate(f: &RealField) -> f64 {
    let g = f.grid();
    let v = f.values();
    g.cell_area() * block_sum(Exec::default(), v.len(), g.ny(), |i| v[i])
}

pub fn norm_l2(f: &RealField) -> f64 {
    let g = f.grid();
    let v = f.values();
    (g.cell_area() * block_sum(Exec::default(), v.len(), g.ny(), |i| v[i] * v[i])).sqrt()
}

pub fn mean(f: &RealField) -> f64 {
    integrate(f) / TORUS_AREA
}

/// `(f, g)` in L2.
pub fn inner(f: &RealField, g: &RealField) -> f64 {
    let grid = f.grid();
    let (a, b) = (f.values(), g.values());
    grid.cell_area() * block_sum(Exec::default(), a.len(), grid.ny(), |i| a[i] * b[i])
}
