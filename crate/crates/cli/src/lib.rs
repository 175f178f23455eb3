//! Batch runner for the simulator: TOML run configurations, bundled presets,
//! parameter sweeps, and CSV/PGM/JSON artifacts.

pub mod config;
pub mod error;
pub mod presets;
pub mod runner;
pub mod sweep;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use runner::{run_config, RunTarget, Summary};
