//! Topology of point clouds: Vietoris-Rips filtrations, persistent
//! homology, Betti number inference, and a brute-force oracle used to
//! cross-check the fast path.
//!
//! The intended entry point is [`analyze`], which subsamples a cloud,
//! builds the filtration, reduces it, and reads Betti numbers off the
//! barcode with a persistence cutoff.

pub mod complex;
pub mod oracle;
pub mod persistence;

pub use complex::{build_vr, landmark_indices, FilteredComplex, Simplex, MAX_SIMPLICES};
pub use oracle::{betti_oracle, ORACLE_MAX_SIMPLICES};
pub use persistence::{reduce_persistence, Barcode, Interval};
pub use tvae_core::BettiVector;

use serde::Serialize;
use thiserror::Error;
use tvae_core::{CoreError, PointCloud};

#[derive(Debug, Error)]
pub enum TdaError {
    #[error("simplex vertices {0:?} must be 1..=4 strictly increasing indices")]
    BadSimplex(Vec<u32>),
    #[error("filtration value {0} must be finite and nonnegative")]
    BadFiltration(f64),
    #[error("homology dimension cap must be 1 or 2, got {0}")]
    BadMaxDim(u8),
    #[error("max radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("lifetime ratio must lie strictly between 0 and 1, got {0}")]
    BadLifetimeRatio(f64),
    #[error("need at least 2 landmark points, got {0}")]
    TooFewLandmarks(usize),
    #[error("{0} points exceed the vertex index range")]
    TooManyPoints(usize),
    #[error("complex exceeds {cap} simplices ({have} and counting); lower the landmark count or radius")]
    TooLarge { have: usize, cap: usize },
    #[error("oracle limited to {} simplices, got {0}; subsample first", ORACLE_MAX_SIMPLICES)]
    OracleTooLarge(usize),
    #[error("complex is not closed under faces at simplex {0:?}")]
    NotClosed(Vec<u32>),
    #[error("duplicate simplex {0:?}")]
    DuplicateSimplex(Vec<u32>),
    #[error("point cloud has zero diameter")]
    DegenerateCloud,
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl TdaError {
    /// True when the failure is a size cap rather than bad input. The CLI
    /// maps these to a distinct exit code.
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, TdaError::TooLarge { .. } | TdaError::OracleTooLarge(_))
    }
}

/// Knobs for [`analyze`]. Defaults depend on the homology cap because the
/// simplex count explodes with dimension: clouds analyzed through
/// dimension 2 get fewer landmarks than dimension-1 runs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VrConfig {
    /// Largest homology dimension to report (1 or 2).
    pub max_dim: u8,
    /// Subsample size; the whole cloud is used when it is smaller.
    pub landmarks: usize,
    /// Filtration cutoff. `None` picks half the landmark-set diameter,
    /// which censors late deaths but keeps every class detectable as an
    /// unbounded interval.
    pub max_radius: Option<f64>,
    /// Minimum bar length, as a fraction of the diameter, for a class to
    /// count as topology instead of noise.
    pub lifetime_ratio: f64,
}

impl VrConfig {
    pub fn for_max_dim(max_dim: u8) -> Self {
        VrConfig {
            max_dim,
            landmarks: if max_dim >= 2 { 150 } else { 400 },
            max_radius: None,
            lifetime_ratio: 0.15,
        }
    }
}

/// Everything the topology stage reports for one cloud.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub barcode: Barcode,
    pub betti: BettiVector,
    pub diameter: f64,
    pub max_radius: f64,
    pub landmarks_used: usize,
    pub simplex_count: usize,
}

/// Subsamples, filters, reduces, and infers Betti numbers in one call.
pub fn analyze(cloud: &PointCloud, cfg: &VrConfig) -> Result<Analysis, TdaError> {
    if !(1..=2).contains(&cfg.max_dim) {
        return Err(TdaError::BadMaxDim(cfg.max_dim));
    }
    let effective = cfg.landmarks.min(cloud.len());
    if effective < 2 {
        return Err(TdaError::TooFewLandmarks(effective));
    }
    let picks = complex::landmark_indices(cloud, effective);
    let sub: Vec<Vec<f64>> = picks.iter().map(|&i| cloud.point(i).to_vec()).collect();
    let sub = PointCloud::new(sub, cloud.meta().clone()).map_err(TdaError::Core)?;

    let diameter = sub.diameter();
    if !(diameter > 0.0) {
        return Err(TdaError::DegenerateCloud);
    }
    let max_radius = match cfg.max_radius {
        Some(r) => r,
        None => 0.5 * diameter,
    };

    let cx = build_vr(&sub, cfg.max_dim, max_radius, effective)?;
    let barcode = reduce_persistence(&cx)?;
    let betti = barcode.infer_betti(diameter, cfg.lifetime_ratio)?;
    Ok(Analysis {
        barcode,
        betti,
        diameter,
        max_radius,
        landmarks_used: effective,
        simplex_count: cx.len(),
    })
}

/// The JSON document the `betti` command writes: every interval (null
/// death marks an unbounded class), the cloud diameter the cutoff was
/// relative to, and the inferred Betti numbers.
#[derive(Debug, Serialize)]
pub struct BarcodeReport<'a> {
    pub intervals: &'a [Interval],
    pub diameter: f64,
    pub betti: BettiVector,
}

impl Analysis {
    pub fn report(&self) -> BarcodeReport<'_> {
        BarcodeReport {
            intervals: &self.barcode.intervals,
            diameter: self.diameter,
            betti: self.betti,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tvae_core::{Meta, Rng};

    fn circle_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = Rng::stream(seed, "tda-lib-test");
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let t = rng.uniform(0.0, std::f64::consts::TAU);
                vec![t.cos(), t.sin()]
            })
            .collect();
        PointCloud::new(pts, Meta::default()).unwrap()
    }

    #[test]
    fn circle_sample_reports_one_loop() {
        let analysis = analyze(&circle_cloud(300, 5), &VrConfig::for_max_dim(1)).unwrap();
        assert_eq!(analysis.betti, BettiVector::new(1, 1, 0));
        assert!(analysis.landmarks_used <= 300);
        assert!((analysis.diameter - 2.0).abs() < 0.05);
    }

    #[test]
    fn report_serializes_to_the_documented_shape() {
        let analysis = analyze(&circle_cloud(60, 6), &VrConfig::for_max_dim(1)).unwrap();
        let json = serde_json::to_value(analysis.report()).unwrap();
        assert!(json["intervals"].is_array());
        assert!(json["diameter"].is_number());
        assert_eq!(json["betti"].as_array().unwrap().len(), 3);
        let first = &json["intervals"][0];
        assert!(first.get("dim").is_some());
        assert!(first.get("birth").is_some());
        assert!(first.get("death").is_some());
        assert!(json["intervals"]
            .as_array()
            .unwrap()
            .iter()
            .any(|iv| iv["death"].is_null()));
    }

    #[test]
    fn degenerate_cloud_is_rejected() {
        let c = PointCloud::new(vec![vec![1.0, 1.0]; 5], Meta::default()).unwrap();
        assert!(matches!(
            analyze(&c, &VrConfig::for_max_dim(1)),
            Err(TdaError::DegenerateCloud)
        ));
    }

    #[test]
    fn resource_errors_are_flagged_for_the_cli() {
        assert!(TdaError::OracleTooLarge(9000).is_resource_cap());
        assert!(TdaError::TooLarge { have: 1, cap: 1 }.is_resource_cap());
        assert!(!TdaError::BadMaxDim(0).is_resource_cap());
    }
}
