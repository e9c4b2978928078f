//! Shared numeric containers, dataset file I/O, deterministic RNG streams,
//! and experiment configuration for the tvae pipeline.

pub mod cloud;
pub mod config;
pub mod csv;
pub mod rng;

pub use cloud::{euclidean, BettiVector, Meta, PointCloud};
pub use config::{ExperimentConfig, LatentLayout, System, TermKind, TrainingParams};
pub use rng::Rng;

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    InvalidData(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

impl CoreError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
