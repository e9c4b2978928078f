//! The constrained autoencoder itself: an encoder/decoder pair whose leading
//! latent coordinates are pinned to a chosen manifold (circle, sphere, or
//! lemniscate) by a penalty term, while the remaining coordinates pay a
//! Gaussian prior cost. Loss evaluation returns exact gradients so training
//! can chain them straight into the network backward passes.

pub mod loss;
pub mod model;

pub use loss::{gpv_penalty, topo_term, vae_loss, LossConfig, LossTerms, ReconMode, LEMNISCATE_C};
pub use model::{TvaeModel, CHECKPOINT_MAGIC};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VaeError {
    #[error("term `{term}` constrains {expected} latent coordinates, got {got}")]
    ArityMismatch {
        term: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("loss weight {name} must be finite and nonnegative, got {value}")]
    BadWeight { name: &'static str, value: f64 },
    #[error("checkpoint {}: {reason}", path.display())]
    BadCheckpoint { path: PathBuf, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Nn(#[from] tvae_nn::NnError),
    #[error(transparent)]
    Core(#[from] tvae_core::CoreError),
}
