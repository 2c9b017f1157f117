//! Subcommands of the `mbe` binary.
//!
//! Every command writes into its own run directory below the configured output
//! directory, so concurrent invocations never share files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mbe_core::analysis::{
    build_multipliers, certify_theta0_uniform, find_tau_c, lemma_sampler, verify_recurrence_contraction,
    EnergyRecord, RecurrenceSpec, SweepResult, SweepSpec,
};
use mbe_core::io::energy_csv::fmt_f64;
use mbe_core::io::{parse_config, parse_sweep_config, write_energy_csv, write_snapshot, InitialCondition, RunConfig};
use mbe_core::schemes::{run_simulation, DiagnosticsSink, SimResult};
use mbe_core::{Exec, GridSpec, RealField, Spectral};
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mbe_core::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("run blew up at step {step} (blowup_fatal is set)")]
    Blowup { step: u64 },
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for failed checks, 3 for a fatal blowup.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(_) | CliError::Io { .. } => 1,
            CliError::Verification(_) => 2,
            CliError::Blowup { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub record_every: Option<u64>,
    pub snapshot_every: Option<u64>,
    /// Seed of a random initial condition; ignored for other kinds.
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(r) = self.record_every {
            if r == 0 {
                return Err(CliError::Usage("--record-every must be >= 1".into()));
            }
            cfg.scheme.record_every = r;
        }
        if let Some(s) = self.snapshot_every {
            cfg.scheme.snapshot_every = s;
        }
        apply_seed(&mut cfg.initial, self.seed);
        Ok(())
    }
}

fn apply_seed(ic: &mut InitialCondition, seed: Option<u64>) {
    if let (InitialCondition::Random { seed: s, .. }, Some(new)) = (ic, seed) {
        *s = new;
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("metadata is serializable");
    fs::write(path, text + "\n").map_err(io_err(path))
}

fn spectral_for(grid: GridSpec, dealias: bool) -> Spectral {
    Spectral::new(grid).with_exec(Exec::default()).with_dealias(dealias)
}

struct SnapshotSink {
    dir: PathBuf,
    written: usize,
}

impl DiagnosticsSink for SnapshotSink {
    fn on_snapshot(&mut self, step: u64, time: f64, field: &RealField) -> mbe_core::Result<()> {
        write_snapshot(self.dir.join(format!("snap_{step:06}.mbef")), field, time, step)?;
        self.written += 1;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct RunMetadata<'a> {
    version: &'static str,
    command: &'static str,
    config_path: &'a Path,
    config: &'a RunConfig,
    seed: Option<u64>,
    n_steps: u64,
    final_time: f64,
    steps_completed: u64,
    blowup: bool,
    blowup_step: Option<u64>,
    records: usize,
    snapshots: usize,
}

#[derive(Debug, Clone)]
pub struct SimulateSummary {
    pub run_dir: PathBuf,
    pub n_steps: u64,
    pub final_time: f64,
    pub blowup_step: Option<u64>,
    pub records: usize,
    pub snapshots: usize,
}

fn run_config(cfg: &RunConfig, h0: &RealField, run_dir: &Path) -> Result<(SimResult, usize)> {
    let sp = spectral_for(cfg.grid, cfg.dealias);
    let snap_dir = run_dir.join("snapshots");
    if cfg.scheme.snapshot_every > 0 {
        create_dir(&snap_dir)?;
    }
    let mut sink = SnapshotSink {
        dir: snap_dir,
        written: 0,
    };
    let res = run_simulation(&sp, &cfg.model, &cfg.scheme, h0, &mut sink)?;
    Ok((res, sink.written))
}

/// Runs one configuration and writes `energy.csv`, `metadata.json` and any
/// snapshots to `<output_dir>/<config stem>/`.
pub fn cmd_simulate(config: &Path, overrides: &Overrides) -> Result<SimulateSummary> {
    let mut cfg = parse_config(config)?;
    overrides.apply(&mut cfg)?;
    let h0 = cfg.initial.build(cfg.grid)?;
    let run_dir = cfg.output_dir.join(stem(config));
    create_dir(&run_dir)?;

    let (res, snapshots) = run_config(&cfg, &h0, &run_dir)?;
    write_energy_csv(&res.records, run_dir.join("energy.csv"))?;
    write_json(
        &run_dir.join("metadata.json"),
        &RunMetadata {
            version: VERSION,
            command: "simulate",
            config_path: config,
            config: &cfg,
            seed: cfg.initial.seed(),
            n_steps: res.n_steps,
            final_time: res.final_time,
            steps_completed: res.state.step,
            blowup: res.blew_up(),
            blowup_step: res.blowup_step,
            records: res.records.len(),
            snapshots,
        },
    )?;
    if let (Some(step), true) = (res.blowup_step, cfg.blowup_fatal) {
        return Err(CliError::Blowup { step });
    }
    Ok(SimulateSummary {
        run_dir,
        n_steps: res.n_steps,
        final_time: res.final_time,
        blowup_step: res.blowup_step,
        records: res.records.len(),
        snapshots,
    })
}

#[derive(Debug, Serialize)]
struct CompareMetadata<'a> {
    version: &'static str,
    command: &'static str,
    config_a: &'a RunConfig,
    config_b: &'a RunConfig,
    seed: Option<u64>,
    n_steps: [u64; 2],
    final_time: [f64; 2],
    blowup_step: [Option<u64>; 2],
}

#[derive(Debug, Clone)]
pub struct CompareSummary {
    pub run_dir: PathBuf,
    pub rows: usize,
    pub blowup_step: [Option<u64>; 2],
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Outer join of two record lists on `step`.
fn write_joined_csv(path: &Path, a: &[EnergyRecord], b: &[EnergyRecord]) -> Result<usize> {
    let mut out = String::from(
        "step,time_a,time_b,energy_a,energy_b,modified_energy_a,modified_energy_b,mass_a,mass_b,l2_norm_a,l2_norm_b,h2_seminorm_a,h2_seminorm_b\n",
    );
    let (mut i, mut j, mut rows) = (0, 0, 0);
    while i < a.len() || j < b.len() {
        let sa = a.get(i).map(|r| r.step);
        let sb = b.get(j).map(|r| r.step);
        let step = match (sa, sb) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) => x,
            (None, Some(y)) => y,
            (None, None) => unreachable!(),
        };
        let ra = a.get(i).filter(|r| r.step == step);
        let rb = b.get(j).filter(|r| r.step == step);
        i += usize::from(ra.is_some());
        j += usize::from(rb.is_some());
        let col = |f: fn(&EnergyRecord) -> Option<f64>| [opt(ra.and_then(f)), opt(rb.and_then(f))].join(",");
        out.push_str(&format!(
            "{step},{},{},{},{},{},{}\n",
            col(|r| Some(r.time)),
            col(|r| Some(r.energy)),
            col(|r| r.modified_energy),
            col(|r| Some(r.mass)),
            col(|r| Some(r.l2_norm)),
            col(|r| Some(r.h2_seminorm)),
        ));
        rows += 1;
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(out.as_bytes()).map_err(io_err(path))?;
    Ok(rows)
}

/// Runs both configurations from the initial datum of `a` and writes the
/// joined energy logs to `<output_dir of a>/<stem a>_vs_<stem b>/compare.csv`.
pub fn cmd_compare(a: &Path, b: &Path, overrides: &Overrides) -> Result<CompareSummary> {
    let mut ca = parse_config(a)?;
    let mut cb = parse_config(b)?;
    overrides.apply(&mut ca)?;
    overrides.apply(&mut cb)?;
    if ca.grid != cb.grid {
        return Err(CliError::Usage(format!(
            "compare needs matching grids ({}x{} vs {}x{})",
            ca.grid.nx(),
            ca.grid.ny(),
            cb.grid.nx(),
            cb.grid.ny()
        )));
    }
    let h0 = ca.initial.build(ca.grid)?;
    let run_dir = ca.output_dir.join(format!("{}_vs_{}", stem(a), stem(b)));
    create_dir(&run_dir)?;
    let (ra, _) = run_config(&ca, &h0, &run_dir.join("a"))?;
    let (rb, _) = run_config(&cb, &h0, &run_dir.join("b"))?;
    let rows = write_joined_csv(&run_dir.join("compare.csv"), &ra.records, &rb.records)?;
    write_json(
        &run_dir.join("metadata.json"),
        &CompareMetadata {
            version: VERSION,
            command: "compare",
            config_a: &ca,
            config_b: &cb,
            seed: ca.initial.seed(),
            n_steps: [ra.n_steps, rb.n_steps],
            final_time: [ra.final_time, rb.final_time],
            blowup_step: [ra.blowup_step, rb.blowup_step],
        },
    )?;
    let blowup_step = [ra.blowup_step, rb.blowup_step];
    if ca.blowup_fatal || cb.blowup_fatal {
        if let Some(step) = blowup_step.iter().flatten().min() {
            return Err(CliError::Blowup { step: *step });
        }
    }
    Ok(CompareSummary {
        run_dir,
        rows,
        blowup_step,
    })
}

#[derive(Debug, Serialize)]
struct Bracket<'a> {
    version: &'static str,
    config_path: &'a Path,
    tau_lo: Option<f64>,
    tau_hi: Option<f64>,
    closed: bool,
    probes: usize,
    seed: Option<u64>,
}

/// Brackets the critical time step and writes `sweep.csv` and `bracket.json`.
pub fn cmd_sweep(config: &Path, overrides: &Overrides) -> Result<(PathBuf, SweepResult)> {
    let mut cfg = parse_sweep_config(config)?;
    if let Some(d) = &overrides.output_dir {
        cfg.output_dir = d.clone();
    }
    apply_seed(&mut cfg.initial, overrides.seed);
    let sp = spectral_for(cfg.grid, cfg.dealias);
    let h0 = cfg.initial.build(cfg.grid)?;
    let spec = SweepSpec {
        params: cfg.model,
        scheme: cfg.scheme,
        t_final: cfg.t_final,
        tau_list: cfg.tau_list.clone(),
        refine_iters: cfg.refine_iters,
        tol: cfg.tol,
        use_modified: cfg.use_modified,
    };
    let res = find_tau_c(&sp, &spec, &h0)?;

    let run_dir = cfg.output_dir.join(stem(config));
    create_dir(&run_dir)?;
    let mut csv = String::from("tau,holds,first_violation_step,max_increase,blowup_step,steps_run,n_steps\n");
    for p in &res.trace {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(p.tau),
            p.report.holds,
            p.report.first_violation_step.map(|s| s.to_string()).unwrap_or_default(),
            fmt_f64(p.report.max_increase),
            p.blowup_step.map(|s| s.to_string()).unwrap_or_default(),
            p.steps_run,
            p.n_steps
        ));
    }
    let path = run_dir.join("sweep.csv");
    fs::write(&path, csv).map_err(io_err(&path))?;
    write_json(
        &run_dir.join("bracket.json"),
        &Bracket {
            version: VERSION,
            config_path: config,
            tau_lo: res.tau_lo,
            tau_hi: res.tau_hi,
            closed: res.is_closed(),
            probes: res.trace.len(),
            seed: cfg.initial.seed(),
        },
    )?;
    Ok((run_dir, res))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Verification taus for the multiplier and recurrence checks.
pub const VERIFY_TAUS: [f64; 4] = [0.5, 1.0, 10.0, 100.0];
const VERIFY_GRID: usize = 256;
const BOUND_TOL: f64 = 1e-12;

/// Runs the property checks of the analysis module. The report is returned
/// in full; failing checks turn into `CliError::Verification` in [`run_verify`].
pub fn cmd_verify(samples: usize, seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let lem = lemma_sampler(samples, 1e3, seed, Exec::default())?;
    checks.push(Check {
        name: "hessian_bound".into(),
        passed: lem.max_hessian_ratio <= 1.0 + BOUND_TOL,
        detail: format!("max ratio {:.15} over {} samples", lem.max_hessian_ratio, lem.samples),
    });
    checks.push(Check {
        name: "lipschitz_bound".into(),
        passed: lem.max_lipschitz_ratio <= 1.0 + BOUND_TOL,
        detail: format!("max ratio {:.15}, {} degenerate pairs skipped", lem.max_lipschitz_ratio, lem.skipped),
    });

    let grid = GridSpec::square(VERIFY_GRID)?;
    for tau in VERIFY_TAUS {
        let m = build_multipliers(tau, grid)?;
        let (sum, prod) = m.root_identity_defects();
        let modulus = m.complex_modulus_defect().unwrap_or(0.0);
        checks.push(Check {
            name: format!("multipliers tau={tau}"),
            passed: m.theta0 < 1.0 && sum <= BOUND_TOL && prod <= BOUND_TOL && modulus <= BOUND_TOL,
            detail: format!("theta0 {:.6}, root defects {sum:.1e}/{prod:.1e}, modulus defect {modulus:.1e}", m.theta0),
        });
        for (forcing, label) in [(0.0, "free"), (0.1, "forced")] {
            let r = verify_recurrence_contraction(&RecurrenceSpec {
                tau,
                grid,
                n_steps: 50,
                seed,
                forcing,
                zero_start: false,
            })?;
            checks.push(Check {
                name: format!("recurrence {label} tau={tau}"),
                passed: r.passed(),
                detail: format!("sup |u| {:.4e} <= bound {:.4e}", r.sup_norm, r.telescoped_bound),
            });
        }
    }
    let cert = certify_theta0_uniform(0.01, 1e3, 25, grid)?;
    checks.push(Check {
        name: "theta0 uniform on [0.01, 1000]".into(),
        passed: cert.monotone && cert.max_theta0 < 1.0,
        detail: format!("max theta0 {:.6}, monotone {}", cert.max_theta0, cert.monotone),
    });
    Ok(VerifyReport { checks })
}

/// [`cmd_verify`] plus printing, optional `verify.json`, and the exit status.
pub fn run_verify(samples: usize, seed: u64, output_dir: Option<&Path>) -> Result<VerifyReport> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be >= 1".into()));
    }
    let report = cmd_verify(samples, seed)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(dir) = output_dir {
        create_dir(dir)?;
        write_json(&dir.join("verify.json"), &report)?;
    }
    if !report.passed() {
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(CliError::Verification(failed.join(", ")));
    }
    Ok(report)
}
