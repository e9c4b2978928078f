//! Minibatch training loop and the evaluation metrics that decide whether a
//! trained model actually learned the manifold: latent collapse statistics,
//! reconstruction error, winding numbers for circle-shaped latents, and
//! neighborhood overlap between observation and latent space.

pub mod eval;
pub mod metrics;
pub mod trainer;

pub use eval::{evaluate, EvalReport, KNN_K};
pub use metrics::{knn_overlap, orbit_lobe_windings, polar_transform, winding_number};
pub use trainer::{train, LossRecord, TrainOutcome, TrainSchedule};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("loss became non-finite at iteration {iteration}{}", match last_good {
        Some(p) => format!(", last good checkpoint at {}", p.display()),
        None => String::new(),
    })]
    NanLoss {
        iteration: usize,
        last_good: Option<PathBuf>,
    },
    #[error("bad schedule: {0}")]
    BadSchedule(String),
    #[error("data mismatch: {0}")]
    DataMismatch(String),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("latent loop collapsed: {0}")]
    CollapsedLatents(String),
    #[error("latent norm {0} is too far from the unit sphere for a polar transform")]
    NotSpherical(f64),
    #[error("metric `{0}` is not finite")]
    NonFiniteMetric(&'static str),
    #[error(transparent)]
    Vae(#[from] tvae_vae::VaeError),
    #[error(transparent)]
    Nn(#[from] tvae_nn::NnError),
    #[error(transparent)]
    Core(#[from] tvae_core::CoreError),
}
