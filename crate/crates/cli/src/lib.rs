//! Command line front end for `crimedde`.
//!
//! A scenario file (TOML, or JSON by extension) fixes the parameters, the
//! history, integrator settings and optional sweep axes. Each command writes
//! its artifacts plus a `manifest.json` into an output directory. Outputs are
//! deterministic: rerunning a scenario reproduces every file byte for byte.

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{Command, Config, Format};
pub use error::{CliError, CliResult};
pub use run::{run_scenario, RunOptions, RunOutcome};
