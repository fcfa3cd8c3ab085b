//! Config-driven experiments over the fraclab estimate ledgers.

pub mod config;
pub mod output;
pub mod run;
pub mod suite;

pub use config::{Command, ConfigInvalid, ExperimentConfig};
pub use output::{Outcome, RunManifest, Table};
pub use run::{execute, RunContext, RunError};
