//! Batch runner for the seqmc experiments: the Fig. 1 style survival curves,
//! the runtime-divergence table, and the property audits.

pub mod audit;
pub mod config;
pub mod divergence;
pub mod fig1;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] seqmc::Error),
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for anything the user can fix in the configuration or paths.
    pub fn exit_code(&self) -> u8 {
        2
    }
}
