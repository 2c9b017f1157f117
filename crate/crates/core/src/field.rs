use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Scalar field sampled on the grid, row-major with the x index as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        RealField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx(),
                grid.ny()
            )));
        }
        Ok(RealField { grid, values })
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx() {
            let x = grid.x(i);
            for j in 0..grid.ny() {
                values.push(f(x, grid.y(j)));
            }
        }
        RealField { grid, values }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the first non-finite value, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub fn is_finite(&self) -> bool {
        self.first_non_finite().is_none()
    }

    pub(crate) fn ensure_finite(&self, what: &'static str) -> Result<()> {
        match self.first_non_finite() {
            Some(index) => Err(Error::NonFinite { what, index }),
            None => Ok(()),
        }
    }

    pub(crate) fn ensure_same_grid(&self, other: &RealField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{}x{} vs {}x{}",
                self.grid.nx(),
                self.grid.ny(),
                other.grid.nx(),
                other.grid.ny()
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> RealField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        RealField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &RealField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Add for &RealField {
    type Output = RealField;
    fn add(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &RealField {
    type Output = RealField;
    fn sub(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<&RealField> for f64 {
    type Output = RealField;
    fn mul(self, rhs: &RealField) -> RealField {
        rhs.map(|v| self * v)
    }
}

/// Fourier coefficients of a field, normalized so that the `(0, 0)`
/// coefficient is the mean. Storage follows FFT order on both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a {}x{} grid",
                coeffs.len(),
                grid.nx(),
                grid.ny()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of the mode `(k1, k2)`; wavenumbers are taken modulo the grid.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.grid.mode_index(k1, k2)]
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, c: Complex64) {
        let idx = self.grid.mode_index(k1, k2);
        self.coeffs[idx] = c;
    }

    /// Largest `|c(k) - conj(c(-k))|` over all modes.
    pub fn hermitian_defect(&self) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut defect: f64 = 0.0;
        for i in 0..nx {
            let mi = (nx - i) % nx;
            for j in 0..ny {
                let mj = (ny - j) % ny;
                let a = self.coeffs[i * ny + j];
                let b = self.coeffs[mi * ny + mj];
                defect = defect.max((a - b.conj()).norm());
            }
        }
        defect
    }

    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}

/// A pair of fields on a shared grid, e.g. a gradient or a flux.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub vx: RealField,
    pub vy: RealField,
}

impl VectorField {
    pub fn new(vx: RealField, vy: RealField) -> Result<Self> {
        vx.ensure_same_grid(&vy)?;
        Ok(VectorField { vx, vy })
    }

    pub fn grid(&self) -> GridSpec {
        self.vx.grid()
    }

    /// Largest pointwise Euclidean length.
    pub fn max_norm(&self) -> f64 {
        self.vx
            .values()
            .iter()
            .zip(self.vy.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}
