//! Run configuration and persistent outputs.

pub mod config;
pub mod energy_csv;
pub mod snapshot;

pub use config::{
    parse_config, parse_run_config_str, parse_sweep_config, parse_sweep_config_str, InitialCondition, RunConfig,
    SweepConfig,
};
pub use energy_csv::{read_energy_csv, read_energy_csv_from, write_energy_csv, write_energy_csv_to};
pub use snapshot::{read_snapshot, read_snapshot_from, write_snapshot, write_snapshot_to, Snapshot};
