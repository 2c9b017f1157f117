use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbe_cli::{cmd_compare, cmd_simulate, cmd_sweep, run_verify, CliError, Overrides};

#[derive(Parser)]
#[command(name = "mbe", version, about = "Pseudo-spectral MBE gradient-flow solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct OverrideArgs {
    /// Output directory (overrides `[output] dir`)
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Record energies every N steps
    #[arg(long, value_name = "N")]
    record_every: Option<u64>,
    /// Write a field snapshot every N steps (0 = never)
    #[arg(long, value_name = "N")]
    snapshot_every: Option<u64>,
    /// Seed of a random initial condition
    #[arg(long)]
    seed: Option<u64>,
}

impl From<OverrideArgs> for Overrides {
    fn from(a: OverrideArgs) -> Self {
        Overrides {
            output_dir: a.output_dir,
            record_every: a.record_every,
            snapshot_every: a.snapshot_every,
            seed: a.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run two configurations on the initial datum of the first
    Compare {
        config_a: PathBuf,
        config_b: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Bracket the critical time step
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Check the analytical bounds numerically
    Verify {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Simulate { config, overrides } => {
            let s = cmd_simulate(&config, &overrides.into())?;
            println!(
                "{} steps to t = {} ({} records, {} snapshots) -> {}",
                s.n_steps,
                s.final_time,
                s.records,
                s.snapshots,
                s.run_dir.display()
            );
            if let Some(step) = s.blowup_step {
                println!("blowup at step {step}");
            }
        }
        Command::Compare {
            config_a,
            config_b,
            overrides,
        } => {
            let s = cmd_compare(&config_a, &config_b, &overrides.into())?;
            println!("{} rows -> {}", s.rows, s.run_dir.join("compare.csv").display());
            for (name, b) in ["a", "b"].iter().zip(s.blowup_step) {
                if let Some(step) = b {
                    println!("run {name}: blowup at step {step}");
                }
            }
        }
        Command::Sweep { config, overrides } => {
            let (dir, r) = cmd_sweep(&config, &overrides.into())?;
            for p in &r.trace {
                println!(
                    "tau = {:<10} {}",
                    p.tau,
                    if p.report.holds { "holds" } else { "fails" }
                );
            }
            let show = |v: Option<f64>| v.map_or("?".to_string(), |t| t.to_string());
            println!("{} < tau_c < {}  -> {}", show(r.tau_lo), show(r.tau_hi), dir.display());
        }
        Command::Verify {
            samples,
            seed,
            output_dir,
        } => {
            run_verify(samples, seed, output_dir.as_deref())?;
            println!("all checks passed");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
