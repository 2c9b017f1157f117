use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform discretization of the torus `[-pi, pi)^2` with `nx * ny` points.
///
/// Point `(i, j)` sits at `x = -pi + i * 2pi/nx`, `y = -pi + j * 2pi/ny`; field
/// values are stored row-major with `i` (the x index) as the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n}: must be even and at least 4"
                )));
            }
        }
        Ok(GridSpec { nx, ny })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * PI / self.ny as f64
    }

    /// Area of one quadrature cell.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x(&self, i: usize) -> f64 {
        -PI + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -PI + j as f64 * self.dy()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Signed wavenumber of FFT slot `i` along an axis of length `n`, in `[-n/2, n/2)`.
    pub fn wavenumber(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// FFT slot of signed wavenumber `k` (taken modulo `n`).
    pub fn slot(k: i64, n: usize) -> usize {
        k.rem_euclid(n as i64) as usize
    }

    /// Storage index of the mode `(k1, k2)`.
    pub fn mode_index(&self, k1: i64, k2: i64) -> usize {
        Self::slot(k1, self.nx) * self.ny + Self::slot(k2, self.ny)
    }
}

/// Tabulated Fourier symbols over all modes, in storage order.
#[derive(Debug, Clone)]
pub struct WaveNumbers {
    /// `k1` per x slot.
    pub kx: Vec<f64>,
    /// `k2` per y slot.
    pub ky: Vec<f64>,
    /// First-derivative symbols with the Nyquist entry zeroed.
    pub kx_odd: Vec<f64>,
    pub ky_odd: Vec<f64>,
    /// `|k|^2` per mode.
    pub ksq: Vec<f64>,
    /// `|k|^4` per mode.
    pub kquad: Vec<f64>,
}

impl WaveNumbers {
    pub fn new(grid: GridSpec) -> Self {
        let axis = |n: usize| -> (Vec<f64>, Vec<f64>) {
            let k: Vec<f64> = (0..n).map(|i| GridSpec::wavenumber(i, n) as f64).collect();
            let mut odd = k.clone();
            odd[n / 2] = 0.0;
            (k, odd)
        };
        let (kx, kx_odd) = axis(grid.nx());
        let (ky, ky_odd) = axis(grid.ny());
        let mut ksq = Vec::with_capacity(grid.len());
        for &a in &kx {
            for &b in &ky {
                ksq.push(a * a + b * b);
            }
        }
        let kquad = ksq.iter().map(|s| s * s).collect();
        WaveNumbers {
            kx,
            ky,
            kx_odd,
            ky_odd,
            ksq,
            kquad,
        }
    }

    /// `kx_odd^2 + ky_odd^2`: the symbol of `-div grad` as realised by the
    /// odd-derivative convention.
    pub fn grad_symbol(&self, idx: usize) -> f64 {
        let ny = self.ky.len();
        let a = self.kx_odd[idx / ny];
        let b = self.ky_odd[idx % ny];
        a * a + b * b
    }
}
