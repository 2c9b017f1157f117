//! Nonlinear fluxes, energy functionals and the pointwise lemma-level maths
//! for each model variant.
//!
//! Every model is written as `dh/dt = -eta^2 Delta^2 h + div(flux(grad h))`
//! where `flux = grad_z W(z)` for the model's energy density `W`. Schemes only
//! ever add `+div(flux)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::{self, block_sum, Exec};
use crate::field::{RealField, VectorField};
use crate::spectral::{integrate, norm_l2, Spectral};

/// Which nonlinearity drives the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// `W = beta1 * cos(beta |z|)`.
    #[serde(rename = "sinc")]
    SincIsotropic,
    /// Double-well slope selection, `dh/dt = -eta^2 Delta^2 h - div((1 - |grad h|^2) grad h)`.
    #[serde(rename = "classical")]
    ClassicalSlopeSelection,
    /// `W = cos(h_x) + cos(h_y)`.
    #[serde(rename = "square")]
    SquareSymmetry,
    /// No nonlinearity; pure biharmonic damping.
    #[serde(rename = "linear")]
    LinearOnly,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SincIsotropic => "sinc",
            ModelKind::ClassicalSlopeSelection => "classical",
            ModelKind::SquareSymmetry => "square",
            ModelKind::LinearOnly => "linear",
        }
    }
}

/// Energy density reported for [`ModelKind::ClassicalSlopeSelection`].
///
/// `Quartic` is `(|z|^2 - 1)^2 / 4`, whose gradient flow is exactly the
/// classical equation. `Standard` is `(|z|^2 - 6)^2 / 24`, the quartic
/// companion of `cos |z|`; it only changes the reported energy, not the flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicalEnergy {
    #[default]
    Quartic,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    /// `eta^2`, the surface-diffusion coefficient.
    pub eta_sq: f64,
    /// Slope scale `beta` (sinc model only).
    pub beta: f64,
    /// Well-depth scale `beta1` (sinc model only).
    pub beta1: f64,
    pub classical_energy: ClassicalEnergy,
}

impl ModelParams {
    /// Model with `beta = beta1 = 1`.
    pub fn new(kind: ModelKind, eta_sq: f64) -> Result<Self> {
        Self::with_scales(kind, eta_sq, 1.0, 1.0)
    }

    pub fn with_scales(kind: ModelKind, eta_sq: f64, beta: f64, beta1: f64) -> Result<Self> {
        let p = ModelParams {
            kind,
            eta_sq,
            beta,
            beta1,
            classical_energy: ClassicalEnergy::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Sinc model scaled so that it matches the classical equation to third order
    /// in `|grad h|`.
    pub fn slope_selection_limit(eta_sq: f64) -> Result<Self> {
        Self::with_scales(ModelKind::SincIsotropic, eta_sq, 6f64.sqrt(), 1.0 / 6.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_sq > 0.0 && self.eta_sq.is_finite()) {
            return Err(invalid("eta_sq", format!("must be finite and > 0 (got {})", self.eta_sq)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta", format!("must be finite and > 0 (got {})", self.beta)));
        }
        if !self.beta1.is_finite() {
            return Err(invalid("beta1", format!("must be finite (got {})", self.beta1)));
        }
        Ok(())
    }

    /// Flux `grad_z W` at a single gradient value.
    #[inline]
    pub fn flux_at(&self, zx: f64, zy: f64) -> (f64, f64) {
        match self.kind {
            ModelKind::SincIsotropic => {
                let s = self.beta * zx.hypot(zy);
                let c = -self.beta * self.beta * self.beta1 * sinc_eval(s);
                (c * zx, c * zy)
            }
            ModelKind::ClassicalSlopeSelection => {
                let c = zx * zx + zy * zy - 1.0;
                (c * zx, c * zy)
            }
            ModelKind::SquareSymmetry => (-zx.sin(), -zy.sin()),
            ModelKind::LinearOnly => (0.0, 0.0),
        }
    }

    /// Energy density `W` at a single gradient value.
    #[inline]
    pub fn density_at(&self, zx: f64, zy: f64) -> f64 {
        match self.kind {
            ModelKind::SincIsotropic => self.beta1 * (self.beta * zx.hypot(zy)).cos(),
            ModelKind::ClassicalSlopeSelection => {
                let r2 = zx * zx + zy * zy;
                match self.classical_energy {
                    ClassicalEnergy::Quartic => 0.25 * (r2 - 1.0) * (r2 - 1.0),
                    ClassicalEnergy::Standard => (r2 - 6.0) * (r2 - 6.0) / 24.0,
                }
            }
            ModelKind::SquareSymmetry => zx.cos() + zy.cos(),
            ModelKind::LinearOnly => 0.0,
        }
    }

    /// Energy of the flat state `h = const`.
    pub fn vacuum_density(&self) -> f64 {
        self.density_at(0.0, 0.0)
    }
}

const SINC_SERIES_SWITCH: f64 = 1e-4;

/// `sin(s) / s`, continuous at zero.
#[inline]
pub fn sinc_eval(s: f64) -> f64 {
    if s.abs() < SINC_SERIES_SWITCH {
        let s2 = s * s;
        1.0 - s2 / 6.0 + s2 * s2 / 120.0
    } else {
        s.sin() / s
    }
}

/// Partial sum `1 - sum_{i=1}^{n} B_i s^{2i}` with `B_i = (-1)^(i-1) / (2i+1)!`.
pub fn sinc_series_partial(s: f64, n_terms: usize) -> f64 {
    let s2 = s * s;
    let mut term = 1.0; // s^{2i} / (2i+1)!
    let mut sum = 1.0;
    for i in 1..=n_terms {
        let m = 2 * i;
        term *= s2 / ((m * (m + 1)) as f64);
        let b_sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        sum -= b_sign * term;
    }
    sum
}

/// Pointwise flux over a gradient field.
pub fn flux(params: &ModelParams, grad: &VectorField) -> VectorField {
    flux_with(Exec::default(), params, grad)
}

pub fn flux_with(exec: Exec, params: &ModelParams, grad: &VectorField) -> VectorField {
    let (gx, gy) = (grad.vx.values(), grad.vy.values());
    let pairs = exec::map_indexed(exec, gx.len(), |i| params.flux_at(gx[i], gy[i]));
    let (fx, fy): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let g = grad.grid();
    VectorField {
        vx: RealField::from_values(g, fx).expect("grid-sized"),
        vy: RealField::from_values(g, fy).expect("grid-sized"),
    }
}

/// `integral of W(grad h)` given the gradient.
pub(crate) fn potential_energy(exec: Exec, params: &ModelParams, grad: &VectorField) -> f64 {
    let (gx, gy) = (grad.vx.values(), grad.vy.values());
    let g = grad.grid();
    g.cell_area() * block_sum(exec, gx.len(), g.ny(), |i| params.density_at(gx[i], gy[i]))
}

/// `E(h) = eta^2/2 ||Delta h||^2 + integral of W(grad h)`.
pub fn total_energy(params: &ModelParams, spectral: &Spectral, h: &RealField) -> Result<f64> {
    let lap = spectral.spectral_laplacian(h)?;
    let grad = spectral.spectral_gradient(h)?;
    let quad = integrate(&lap.map(|v| v * v));
    Ok(0.5 * params.eta_sq * quad + potential_energy(spectral.exec(), params, &grad))
}

/// BDF2 energy with the history terms `1/(4 tau) ||dh||^2 + 1/2 ||grad dh||^2`.
pub fn modified_energy_bdf2(
    params: &ModelParams,
    spectral: &Spectral,
    h_curr: &RealField,
    h_prev: &RealField,
    tau: f64,
) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("must be finite and > 0 (got {tau})")));
    }
    h_curr.ensure_same_grid(h_prev)?;
    let e = total_energy(params, spectral, h_curr)?;
    let dh = h_curr - h_prev;
    let gd = spectral.spectral_gradient(&dh)?;
    let l2 = norm_l2(&dh);
    let grad_sq = norm_l2(&gd.vx).powi(2) + norm_l2(&gd.vy).powi(2);
    Ok(e + l2 * l2 / (4.0 * tau) + 0.5 * grad_sq)
}

/// `sum x_i x_j d_i d_j G(z)` for `G(z) = cos |z|`, continuously extended to `z = 0`.
pub fn hessian_quadratic_form(z: [f64; 2], x: [f64; 2]) -> f64 {
    let r = z[0].hypot(z[1]);
    let xx = x[0] * x[0] + x[1] * x[1];
    if r == 0.0 {
        return -xx;
    }
    let (ux, uy) = (z[0] / r, z[1] / r);
    let par = x[0] * ux + x[1] * uy;
    let perp = -x[0] * uy + x[1] * ux;
    -r.cos() * par * par - sinc_eval(r) * perp * perp
}

/// Eigenvalues `(-cos s, -sin(s)/s)` of the flux Jacobian at `|z| = s`.
pub fn flux_jacobian_eigenvalues(s: f64) -> (f64, f64) {
    debug_assert!(s >= 0.0);
    (-s.cos(), -sinc_eval(s))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn sinc1() -> ModelParams {
        ModelParams::new(ModelKind::SincIsotropic, 0.01).unwrap()
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc_eval(0.0), 1.0);
        assert!(sinc_eval(PI).abs() < 1e-15);
        assert!((sinc_eval(PI / 2.0) - 2.0 / PI).abs() < 1e-15);
        assert!((sinc_eval(-PI / 2.0) - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn sinc_branches_agree_at_switch() {
        for s in [0.9999e-4f64, 1.0001e-4, 5e-5, 1e-7] {
            let direct = s.sin() / s;
            assert!((sinc_eval(s) - direct).abs() <= 1e-15 * direct);
        }
    }

    #[test]
    fn flux_examples() {
        let p = sinc1();
        assert_eq!(p.flux_at(0.0, 0.0), (0.0, 0.0));
        let (fx, fy) = p.flux_at(PI, 0.0);
        assert!(fx.abs() < 1e-15 && fy == 0.0);
        let (fx, fy) = p.flux_at(PI / 2.0, 0.0);
        assert!((fx + 1.0).abs() < 1e-15 && fy == 0.0);
    }

    #[test]
    fn classical_and_square_flux_signs() {
        let c = ModelParams::new(ModelKind::ClassicalSlopeSelection, 0.01).unwrap();
        assert_eq!(c.flux_at(2.0, 0.0), (6.0, 0.0));
        let s = ModelParams::new(ModelKind::SquareSymmetry, 0.01).unwrap();
        let (fx, fy) = s.flux_at(PI / 2.0, -PI / 2.0);
        assert!((fx + 1.0).abs() < 1e-15 && (fy - 1.0).abs() < 1e-15);
        let l = ModelParams::new(ModelKind::LinearOnly, 0.01).unwrap();
        assert_eq!(l.flux_at(3.0, 4.0), (0.0, 0.0));
    }

    #[test]
    fn flux_is_gradient_of_density() {
        let models = [
            sinc1(),
            ModelParams::with_scales(ModelKind::SincIsotropic, 0.1, 1.7, -0.4).unwrap(),
            ModelParams::new(ModelKind::ClassicalSlopeSelection, 0.1).unwrap(),
            ModelParams::new(ModelKind::SquareSymmetry, 0.1).unwrap(),
        ];
        let eps = 1e-6;
        for p in models {
            for &(zx, zy) in &[(0.3, -0.7), (2.1, 0.4), (-1.3, 3.3)] {
                let dx = (p.density_at(zx + eps, zy) - p.density_at(zx - eps, zy)) / (2.0 * eps);
                let dy = (p.density_at(zx, zy + eps) - p.density_at(zx, zy - eps)) / (2.0 * eps);
                let (fx, fy) = p.flux_at(zx, zy);
                assert!((dx - fx).abs() < 1e-7, "{:?}", p.kind);
                assert!((dy - fy).abs() < 1e-7, "{:?}", p.kind);
            }
        }
    }

    #[test]
    fn hessian_examples() {
        assert_eq!(hessian_quadratic_form([0.0, 0.0], [1.0, 0.0]), -1.0);
        assert!((hessian_quadratic_form([PI, 0.0], [1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((hessian_quadratic_form([PI / 2.0, 0.0], [0.0, 1.0]) + 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let g = |a: f64, b: f64| a.hypot(b).cos();
        let h = 1e-4;
        let (z0, z1) = (0.8, -1.9);
        let x = [0.6, 1.3];
        let gxx = (g(z0 + h, z1) - 2.0 * g(z0, z1) + g(z0 - h, z1)) / (h * h);
        let gyy = (g(z0, z1 + h) - 2.0 * g(z0, z1) + g(z0, z1 - h)) / (h * h);
        let gxy = (g(z0 + h, z1 + h) - g(z0 + h, z1 - h) - g(z0 - h, z1 + h) + g(z0 - h, z1 - h)) / (4.0 * h * h);
        let fd = x[0] * x[0] * gxx + 2.0 * x[0] * x[1] * gxy + x[1] * x[1] * gyy;
        assert!((hessian_quadratic_form([z0, z1], x) - fd).abs() < 1e-6);
    }

    #[test]
    fn jacobian_eigenvalue_examples() {
        assert_eq!(flux_jacobian_eigenvalues(0.0), (-1.0, -1.0));
        let (a, b) = flux_jacobian_eigenvalues(PI);
        assert!((a - 1.0).abs() < 1e-15 && b.abs() < 1e-15);
        let (a, b) = flux_jacobian_eigenvalues(PI / 2.0);
        assert!(a.abs() < 1e-15 && (b + 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn series_examples() {
        assert_eq!(sinc_series_partial(7.0, 0), 1.0);
        assert!((sinc_series_partial(1.0, 1) - 5.0 / 6.0).abs() < 1e-15);
        let direct = 2f64.sin() / 2.0;
        assert!((sinc_series_partial(2.0, 15) - direct).abs() < 1e-12);
    }

    #[test]
    fn series_converges_on_moderate_arguments() {
        for k in 0..=60 {
            let s = -3.0 + 0.1 * k as f64;
            assert!((sinc_series_partial(s, 20) - sinc_eval(s)).abs() <= 1e-10);
        }
    }

    #[test]
    fn slope_selection_limit_error_is_fifth_order() {
        let p = ModelParams::slope_selection_limit(0.01).unwrap();
        let mut ratios = Vec::new();
        for k in 0..3 {
            let r = 1e-2 / 2f64.powi(k);
            let (zx, zy) = (r * 0.6, r * 0.8);
            let (fx, fy) = p.flux_at(zx, zy);
            let c = -(1.0 - r * r);
            let err = (fx - c * zx).hypot(fy - c * zy);
            ratios.push(err / r.powi(5));
        }
        // leading coefficient is 36/120
        for q in &ratios {
            assert!((q - 0.3).abs() < 1e-3, "{ratios:?}");
        }
    }

    #[test]
    fn slope_selection_energy_matches_quartic_well() {
        let s = ModelParams::slope_selection_limit(0.01).unwrap();
        let c = ModelParams::new(ModelKind::ClassicalSlopeSelection, 0.01).unwrap();
        let r: f64 = 1e-2;
        let shift = c.vacuum_density() - s.vacuum_density();
        let diff = s.density_at(r, 0.0) + shift - c.density_at(r, 0.0);
        assert!(diff.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(ModelKind::SincIsotropic, 0.0).is_err());
        assert!(ModelParams::with_scales(ModelKind::SincIsotropic, 0.1, -1.0, 1.0).is_err());
        assert!(ModelParams::with_scales(ModelKind::SincIsotropic, 0.1, 1.0, f64::NAN).is_err());
    }
}
