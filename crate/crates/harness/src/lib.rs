//! Reproducible experiment harness around `focal-core`: TOML configs, run
//! orchestration, trace/matrix/spectrum files, seed sweeps and the `focal`
//! command line.

use std::path::PathBuf;

pub mod cli;
pub mod config;
pub mod experiment;
pub mod io;
pub mod registry;
pub mod sweep;
pub mod table1;

pub use config::{ExperimentConfig, Kernel, LandscapeConfig, Mechanism};
pub use experiment::{execute, run_experiment, Execution, ExperimentReport};
pub use table1::{defaults_from_table1, RankClass, Table1Defaults};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] focal_core::Error),
    #[error("run stopped after {generations} generations: {source}")]
    Run {
        generations: usize,
        #[source]
        source: focal_core::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn config_error(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
