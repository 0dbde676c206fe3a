//! Experiment orchestration: configuration, the experiments themselves, and
//! CSV + manifest output.

pub mod config;
pub mod experiments;
pub mod manifest;

pub use config::{ExperimentConfig, Grid, LogGrid, ModelConfig};
pub use manifest::{FileRecord, OutputWriter, RunManifest};
