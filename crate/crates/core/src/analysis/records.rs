use crate::spectral::TORUS_AREA;

/// Diagnostics for one recorded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub step: u64,
    pub time: f64,
    pub energy: f64,
    /// BDF2 modified energy; absent for IMEX runs and at step 0.
    pub modified_energy: Option<f64>,
    /// `integral of h`, i.e. mean times the torus area.
    pub mass: f64,
    pub l2_norm: f64,
    pub h2_seminorm: f64,
    /// `||h^1 - h^0||^2 / tau`, only on the step-1 record.
    pub first_step_ratio: Option<f64>,
}

impl EnergyRecord {
    pub fn mean(&self) -> f64 {
        self.mass / TORUS_AREA
    }
}
