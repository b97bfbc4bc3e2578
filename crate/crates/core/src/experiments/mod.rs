//! Configuration, artifacts and the batch commands that turn the analytic
//! statements into runnable checks.

mod checks;
mod commands;
mod config;
mod data;
mod io;

pub use checks::{run_checks, CheckReport};
pub use commands::{
    cmd_check, cmd_estimate_c0, cmd_order_test, cmd_run, cmd_sweep_eps, cmd_sweep_n, CommandOutcome,
    ExitStatus,
};
pub use config::{
    AssertConfig, CheckConfig, DataConfig, EstimatorConfig, Expression, GridConfig, ModeSpec, Number,
    Preset, Resolved, RunConfig, RunSection, SweepConfig, SystemConfig,
};
pub use data::{build_data, random_data};
pub use io::{
    checkpoint_name, read_checkpoint, sha256_hex, write_checkpoint, Assertion, FileEntry, Manifest,
    SeriesWriter, Versions, SERIES_COLUMNS,
};
