//! Batch front end: reads a problem file, runs one kind of task, and
//! renders the results.

pub mod commands;
pub mod output;
pub mod problem;

use statemetric::linalg::LinalgError;
use statemetric::{EngineError, SeminormError, SpaceError};
use thiserror::Error;

pub use commands::{run, Command, Options, Outcome};
pub use output::{render, Format, RunInfo};
pub use problem::{parse, Problem, Task, SCHEMA};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed problem file: {field}: {message}")]
    Malformed { field: String, message: String },
    #[error("unsupported request: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(EngineError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

fn numerical_linalg(e: &LinalgError) -> bool {
    matches!(e, LinalgError::NoConvergence { .. } | LinalgError::SingularBasis)
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        let numerical = match &e {
            EngineError::NoConvergence { .. } | EngineError::Lp(_) => true,
            EngineError::Linalg(l)
            | EngineError::Seminorm(SeminormError::Linalg(l))
            | EngineError::Space(SpaceError::Linalg(l)) => numerical_linalg(l),
            _ => false,
        };
        if numerical {
            CliError::Numerical(e)
        } else {
            CliError::Unsupported(e.to_string())
        }
    }
}

impl From<SeminormError> for CliError {
    fn from(e: SeminormError) -> Self {
        EngineError::from(e).into()
    }
}

impl From<SpaceError> for CliError {
    fn from(e: SpaceError) -> Self {
        EngineError::from(e).into()
    }
}

/// Reads and validates a problem file from disk.
pub fn load(path: &std::path::Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}
