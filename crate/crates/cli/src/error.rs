use std::path::PathBuf;

use accumsim_core::algorithms::AlgorithmError;
use accumsim_core::graph::GraphError;
use accumsim_core::preprocess::PreprocessError;
use accumsim_core::simulator::SimError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Sim(SimError),
    #[error("rearranged graph lost edges of vertex {0}")]
    RearrangeCheck(u32),
    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(msg) => CliError::Usage(msg),
            SimError::Algorithm(a) => a.into(),
            other => CliError::Sim(other),
        }
    }
}

impl From<AlgorithmError> for CliError {
    fn from(e: AlgorithmError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Sim(SimError::Capacity { .. }) => EXIT_CAPACITY,
            CliError::Preprocess(PreprocessError::BadBankCount(_) | PreprocessError::BadPartitionCount { .. }) => {
                EXIT_USAGE
            }
            CliError::Sim(SimError::Preprocess(PreprocessError::BadPartitionCount { .. })) => EXIT_USAGE,
            _ => EXIT_INPUT,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
