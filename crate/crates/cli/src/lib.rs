//! Experiment harness: configuration, data ingestion, synthetic data, chain
//! execution and artifact output.

pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod report;
pub mod synth;
pub mod trace_io;

pub use config::ExperimentConfig;
pub use data::{load_data, permute_data, Observations};
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, run_oracle, sample_chain, RunOptions, Summary};
pub use synth::{generate_synthetic, SynthName};
