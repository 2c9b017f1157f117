//! TOML run and sweep configuration.
//!
//! A run file has four required tables and one optional one:
//!
//! ```toml
//! [model]
//! kind = "sinc"            # sinc | classical | square | linear
//! eta_sq = 0.01
//! beta = 1.0               # default 1
//! beta1 = 1.0              # default 1
//! classical_energy = "quartic"   # quartic | standard
//!
//! [scheme]
//! kind = "imex"            # imex | bdf2
//! tau = 0.001
//! t_final = 1.0
//! record_every = 1         # default 1
//! snapshot_every = 0       # default 0 (never)
//!
//! [grid]
//! n = 256                  # or nx = .., ny = ..
//! dealias = false
//!
//! [initial]
//! kind = "trig"            # trig | random | file
//! # amplitude = 0.01, seed = 0   (random)
//! # path = "h0.mbef"             (file, relative to the config file)
//!
//! [output]
//! dir = "output"
//! blowup_fatal = false
//! ```
//!
//! A sweep file replaces `[scheme]` with
//!
//! ```toml
//! [sweep]
//! scheme = "imex"
//! t_final = 200.0
//! tau_list = [0.09, 0.1]
//! refine_iters = 0
//! tol = 1e-12
//! use_modified = false
//! ```
//!
//! Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::DEFAULT_TOL;
use crate::error::{Error, Result};
use crate::field::RealField;
use crate::grid::GridSpec;
use crate::models::{ClassicalEnergy, ModelKind, ModelParams};
use crate::schemes::{initial_condition_random, initial_condition_trig, SchemeConfig, SchemeKind};

use super::snapshot::read_snapshot;

fn one() -> f64 {
    1.0
}
fn one_u64() -> u64 {
    1
}
fn default_amplitude() -> f64 {
    0.01
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    kind: ModelKind,
    eta_sq: f64,
    #[serde(default = "one")]
    beta: f64,
    #[serde(default = "one")]
    beta1: f64,
    #[serde(default)]
    classical_energy: ClassicalEnergy,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeSection {
    kind: SchemeKind,
    tau: f64,
    t_final: f64,
    #[serde(default = "one_u64")]
    record_every: u64,
    #[serde(default)]
    snapshot_every: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    n: Option<usize>,
    nx: Option<usize>,
    ny: Option<usize>,
    #[serde(default)]
    dealias: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(default = "default_dir")]
    dir: PathBuf,
    #[serde(default)]
    blowup_fatal: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            blowup_fatal: false,
        }
    }
}

/// Initial datum of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialCondition {
    /// `0.1 (sin 3x sin 2y + sin 5x sin 5y)`.
    Trig,
    Random {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// A field snapshot.
    File { path: PathBuf },
}

impl InitialCondition {
    pub fn build(&self, grid: GridSpec) -> Result<RealField> {
        match self {
            InitialCondition::Trig => Ok(initial_condition_trig(grid)),
            InitialCondition::Random { amplitude, seed } => initial_condition_random(grid, *amplitude, *seed),
            InitialCondition::File { path } => {
                let snap = read_snapshot(path)?;
                if snap.field.grid() != grid {
                    return Err(Error::GridMismatch(format!(
                        "{}: snapshot is {}x{}, run grid is {}x{}",
                        path.display(),
                        snap.field.grid().nx(),
                        snap.field.grid().ny(),
                        grid.nx(),
                        grid.ny()
                    )));
                }
                Ok(snap.field)
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            InitialCondition::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    model: ModelSection,
    scheme: SchemeSection,
    grid: GridSection,
    initial: InitialCondition,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    scheme: SchemeKind,
    t_final: f64,
    tau_list: Vec<f64>,
    #[serde(default)]
    refine_iters: usize,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default)]
    use_modified: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    model: ModelSection,
    sweep: SweepSection,
    grid: GridSection,
    initial: InitialCondition,
    #[serde(default)]
    output: OutputSection,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelParams,
    pub scheme: SchemeConfig,
    pub grid: GridSpec,
    pub dealias: bool,
    pub initial: InitialCondition,
    pub output_dir: PathBuf,
    pub blowup_fatal: bool,
}

/// A validated sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub model: ModelParams,
    pub scheme: SchemeKind,
    pub t_final: f64,
    pub tau_list: Vec<f64>,
    pub refine_iters: usize,
    pub tol: f64,
    pub use_modified: bool,
    pub grid: GridSpec,
    pub dealias: bool,
    pub initial: InitialCondition,
    pub output_dir: PathBuf,
}

fn key_error(path: &Path, key: &str, message: impl std::fmt::Display) -> Error {
    Error::Config {
        path: path.to_path_buf(),
        message: format!("`{key}`: {message}"),
    }
}

/// Re-labels a library validation error with its config key.
fn scoped(path: &Path, section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => key_error(path, &format!("{section}.{name}"), reason),
        Error::InvalidGrid(m) => key_error(path, "grid", m),
        other => other,
    }
}

fn model_from(path: &Path, m: &ModelSection) -> Result<ModelParams> {
    let mut p = ModelParams::with_scales(m.kind, m.eta_sq, m.beta, m.beta1).map_err(|e| scoped(path, "model", e))?;
    p.classical_energy = m.classical_energy;
    Ok(p)
}

fn grid_from(path: &Path, g: &GridSection) -> Result<GridSpec> {
    let (nx, ny) = match (g.n, g.nx, g.ny) {
        (Some(n), None, None) => (n, n),
        (None, Some(nx), Some(ny)) => (nx, ny),
        _ => return Err(key_error(path, "grid", "give either `n` or both `nx` and `ny`")),
    };
    GridSpec::new(nx, ny).map_err(|e| scoped(path, "grid", e))
}

fn initial_from(path: &Path, ic: InitialCondition) -> Result<InitialCondition> {
    match ic {
        InitialCondition::Random { amplitude, .. } if !(amplitude > 0.0 && amplitude.is_finite()) => Err(key_error(
            path,
            "initial.amplitude",
            format!("must be finite and > 0 (got {amplitude})"),
        )),
        InitialCondition::File { path: p } if p.is_relative() => Ok(InitialCondition::File {
            path: path.parent().unwrap_or(Path::new(".")).join(p),
        }),
        other => Ok(other),
    }
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Parses a run configuration from TOML text; `path` is used for messages and
/// to resolve a relative initial-condition file.
pub fn parse_run_config_str(text: &str, path: &Path) -> Result<RunConfig> {
    let raw: RunFile = parse_toml(path, text)?;
    let model = model_from(path, &raw.model)?;
    let scheme = SchemeConfig {
        scheme: raw.scheme.kind,
        tau: raw.scheme.tau,
        t_final: raw.scheme.t_final,
        snapshot_every: raw.scheme.snapshot_every,
        record_every: raw.scheme.record_every,
    };
    scheme.validate().map_err(|e| scoped(path, "scheme", e))?;
    Ok(RunConfig {
        model,
        scheme,
        grid: grid_from(path, &raw.grid)?,
        dealias: raw.grid.dealias,
        initial: initial_from(path, raw.initial)?,
        output_dir: raw.output.dir,
        blowup_fatal: raw.output.blowup_fatal,
    })
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    parse_run_config_str(&fs::read_to_string(path)?, path)
}

pub fn parse_sweep_config_str(text: &str, path: &Path) -> Result<SweepConfig> {
    let raw: SweepFile = parse_toml(path, text)?;
    let model = model_from(path, &raw.model)?;
    let s = raw.sweep;
    if !(s.t_final > 0.0 && s.t_final.is_finite()) {
        return Err(key_error(path, "sweep.t_final", "must be finite and > 0"));
    }
    if s.tau_list.is_empty() || s.tau_list.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(key_error(path, "sweep.tau_list", "must be a non-empty list of positive steps"));
    }
    if s.tau_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(key_error(path, "sweep.tau_list", "must be strictly increasing"));
    }
    if s.tol.is_nan() || s.tol <= 0.0 {
        return Err(key_error(path, "sweep.tol", "must be > 0"));
    }
    if s.use_modified && s.scheme != SchemeKind::Bdf2 {
        return Err(key_error(path, "sweep.use_modified", "only meaningful with scheme = \"bdf2\""));
    }
    Ok(SweepConfig {
        model,
        scheme: s.scheme,
        t_final: s.t_final,
        tau_list: s.tau_list,
        refine_iters: s.refine_iters,
        tol: s.tol,
        use_modified: s.use_modified,
        grid: grid_from(path, &raw.grid)?,
        dealias: raw.grid.dealias,
        initial: initial_from(path, raw.initial)?,
        output_dir: raw.output.dir,
    })
}

pub fn parse_sweep_config(path: impl AsRef<Path>) -> Result<SweepConfig> {
    let path = path.as_ref();
    parse_sweep_config_str(&fs::read_to_string(path)?, path)
}
