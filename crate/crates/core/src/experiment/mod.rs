//! Configuration, orchestration, persistence and export of experiments.

pub mod config;
pub mod export;
pub mod run;
pub mod store;

pub use config::{ExperimentConfig, Kind, ReferenceDoc};
pub use export::{export, Artifact, Format, Records};
pub use run::{run, RunSummary};
pub use store::ResultStore;
