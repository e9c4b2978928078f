//! Point clouds and the small value types shared across the pipeline.

use crate::CoreError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Dataset provenance carried in `#` comment lines of the CSV format.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub system: Option<String>,
    pub seed: Option<u64>,
    /// Free-form generator parameters, kept sorted so serialization is stable.
    pub params: BTreeMap<String, String>,
}

impl Meta {
    pub fn new(system: &str, seed: u64) -> Self {
        Meta {
            system: Some(system.to_string()),
            seed: Some(seed),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

/// N observation vectors in R^m. Immutable after construction; rows are
/// stored flat in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    dim: usize,
    meta: Meta,
}

impl PointCloud {
    /// Builds a cloud from row vectors, rejecting empty input, ragged rows,
    /// and non-finite entries.
    pub fn new(points: Vec<Vec<f64>>, meta: Meta) -> Result<Self, CoreError> {
        let dim = match points.first() {
            Some(p) => p.len(),
            None => return Err(CoreError::InvalidData("point cloud must contain at least one point".into())),
        };
        let mut data = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(CoreError::InvalidData(format!(
                    "point {i} has {} entries, expected {dim}",
                    p.len()
                )));
            }
            data.extend_from_slice(p);
        }
        Self::from_flat(data, dim, meta)
    }

    /// Builds a cloud from a flat row-major buffer of `n * dim` entries.
    pub fn from_flat(data: Vec<f64>, dim: usize, meta: Meta) -> Result<Self, CoreError> {
        if dim == 0 {
            return Err(CoreError::InvalidData("point dimension must be at least 1".into()));
        }
        if data.is_empty() {
            return Err(CoreError::InvalidData("point cloud must contain at least one point".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(CoreError::InvalidData(format!(
                "flat buffer of {} entries is not a multiple of dim {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::InvalidData(format!(
                "non-finite entry at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(PointCloud { data, dim, meta })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // N >= 1 by construction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Copies out column `j` (one coordinate across all rows).
    pub fn column(&self, j: usize) -> Vec<f64> {
        assert!(j < self.dim, "column {j} out of range for dim {}", self.dim);
        self.points().map(|p| p[j]).collect()
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut Meta {
        &mut self.meta
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    /// Largest pairwise Euclidean distance. O(n^2).
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(self.point(i), self.point(j));
                if d > best {
                    best = d;
                }
            }
        }
        best
    }
}

/// Euclidean distance between two equal-length slices.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Ranks of the homology groups in dimensions 0..=2: connected components,
/// independent loops, enclosed voids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "[u32; 3]", from = "[u32; 3]")]
pub struct BettiVector {
    pub b0: u32,
    pub b1: u32,
    pub b2: u32,
}

impl BettiVector {
    pub fn new(b0: u32, b1: u32, b2: u32) -> Self {
        BettiVector { b0, b1, b2 }
    }
}

impl From<BettiVector> for [u32; 3] {
    fn from(b: BettiVector) -> Self {
        [b.b0, b.b1, b.b2]
    }
}

impl From<[u32; 3]> for BettiVector {
    fn from(a: [u32; 3]) -> Self {
        BettiVector::new(a[0], a[1], a[2])
    }
}

impl fmt::Display for BettiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.b0, self.b1, self.b2)
    }
}
