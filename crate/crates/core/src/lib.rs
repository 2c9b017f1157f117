//! Pseudo-spectral solvers for sinc-type and classical molecular-beam-epitaxy
//! gradient flows on the periodic torus `[-pi, pi]^2`.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: FFTs, diagonal derivative operators, quadrature.
//! * [`models`]: fluxes and energies of each model variant.
//! * [`schemes`]: IMEX and BDF2 time stepping and run orchestration.
//! * [`analysis`]: dissipation checks, critical time-step sweeps, boundedness
//!   monitoring and certification of the recurrence multipliers.
//! * [`io`]: run configuration, energy CSV logs and binary field snapshots.
//!
//! Inner loops run on rayon when the `parallel` feature is on (the default);
//! see [`Exec`].

pub mod analysis;
mod error;
mod exec;
pub mod field;
pub mod grid;
pub mod io;
pub mod models;
pub mod schemes;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Exec;
pub use field::{RealField, SpectralField, VectorField};
pub use grid::{GridSpec, WaveNumbers};
pub use models::{ModelKind, ModelParams};
pub use schemes::{SchemeConfig, SchemeKind};
pub use spectral::Spectral;
