//! Pipeline orchestration behind the `asymmetry` binary. Each stage reads the
//! artifacts of its upstream stages from the output directory and writes its
//! own; `all` chains them.

pub mod artifacts;
pub mod config;
pub mod stages;

use asymmetry_core::Error;
use thiserror::Error as ThisError;

pub use config::RunConfig;
pub use stages::{run_stage, Stage};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("computation error: {0}")]
    Computation(String),
    #[error("missing artifact {artifact}; run the `{stage}` stage first")]
    Dependency {
        artifact: String,
        stage: &'static str,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Computation(_) => 2,
            CliError::Dependency { .. } => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema { .. }
            | Error::Duplicate { .. }
            | Error::EmptyInput { .. }
            | Error::Io { .. }
            | Error::Config(_)
            | Error::InconsistentEvent { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Computation(e.to_string()),
        }
    }
}
