//! File formats and command drivers.

pub mod commands;
pub mod config;
pub mod csv;
pub mod snapshot;
pub mod svg;

pub use commands::{cmd_compare, cmd_oracle, cmd_probe, cmd_run, exit_code, simulate, CompareReport, RunOverrides, RunSummary};
pub use config::{load_config, parse_config, parse_probes, ExperimentConfig, GeometrySpec};
pub use snapshot::{format_snapshot, parse_snapshot, read_snapshot, write_snapshot};
