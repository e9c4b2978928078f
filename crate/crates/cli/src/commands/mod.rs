mod betti;
mod eval;
mod export;
mod generate;
mod train;

pub use betti::{betti, BettiArgs};
pub use eval::{eval, EvalArgs};
pub use export::{export, ExportArgs};
pub use generate::{generate, GenerateArgs};
pub use train::{train, TrainArgs};

use std::path::Path;

use anyhow::{Context, Result};
use tvae_core::{csv, PointCloud, System};

pub(crate) fn load_cloud(path: &Path) -> Result<PointCloud> {
    csv::load_csv(path).with_context(|| format!("loading {}", path.display()))
}

/// The system a dataset was generated from, per its CSV metadata.
pub(crate) fn system_of(cloud: &PointCloud, path: &Path) -> Result<System> {
    cloud
        .meta()
        .system
        .as_deref()
        .with_context(|| format!("{}: metadata names no system", path.display()))?
        .parse()
        .with_context(|| format!("{}: metadata names no valid system", path.display()))
}
