//! Configuration, validation and execution of `regenrad` experiments.

pub mod config;
pub mod manifest;
pub mod run;
pub mod validate;

pub use config::{ExperimentConfig, ExperimentKind};
pub use manifest::RunManifest;
pub use run::{run, RunReport};
pub use validate::{resolve, validate, Violation, Violations};
