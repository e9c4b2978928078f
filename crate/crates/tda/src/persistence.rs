//! Persistence barcodes via boundary-matrix reduction over GF(2).
//!
//! Columns are reduced in filtration order, one dimension at a time from
//! the top dimension down. A column that reduces to zero creates a class;
//! a nonzero column kills the class created at its pivot row, yielding the
//! interval [birth of pivot, birth of column). Processing high dimensions
//! first lets paired rows be skipped outright (their columns are known to
//! reduce to zero), which removes most of the work on clique-heavy
//! complexes.

use crate::complex::FilteredComplex;
use crate::TdaError;
use serde::Serialize;
use std::collections::HashMap;
use tvae_core::BettiVector;

/// One persistence interval. `death: None` means the class survives the
/// whole (radius-truncated) filtration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub dim: u8,
    pub birth: f64,
    pub death: Option<f64>,
}

impl Interval {
    pub fn lifetime(&self) -> f64 {
        match self.death {
            Some(d) => d - self.birth,
            None => f64::INFINITY,
        }
    }
}

/// All nonzero-length intervals of a filtration, sorted by (dim, birth,
/// death). Pairs that are born and die at the same value are omitted;
/// they exist for bookkeeping only and no scale can observe them.
#[derive(Debug, Clone, PartialEq)]
pub struct Barcode {
    pub intervals: Vec<Interval>,
}

impl Barcode {
    /// Betti numbers at a single scale: classes with birth <= eps < death.
    pub fn betti_at(&self, eps: f64) -> BettiVector {
        let mut counts = [0u32; 3];
        for iv in &self.intervals {
            let alive = iv.birth <= eps && iv.death.is_none_or(|d| eps < d);
            if alive && iv.dim <= 2 {
                counts[iv.dim as usize] += 1;
            }
        }
        BettiVector::new(counts[0], counts[1], counts[2])
    }

    /// Betti numbers read off the barcode as a whole: count classes whose
    /// lifetime is at least `lifetime_ratio` of the cloud diameter.
    /// Unbounded classes always count. This is how the pipeline separates
    /// real cycles from sampling noise.
    pub fn infer_betti(
        &self,
        diameter: f64,
        lifetime_ratio: f64,
    ) -> Result<BettiVector, TdaError> {
        if !(diameter > 0.0) {
            return Err(TdaError::DegenerateCloud);
        }
        if !(lifetime_ratio > 0.0 && lifetime_ratio < 1.0) {
            return Err(TdaError::BadLifetimeRatio(lifetime_ratio));
        }
        let cutoff = lifetime_ratio * diameter;
        let mut counts = [0u32; 3];
        for iv in &self.intervals {
            if iv.dim <= 2 && iv.lifetime() >= cutoff {
                counts[iv.dim as usize] += 1;
            }
        }
        Ok(BettiVector::new(counts[0], counts[1], counts[2]))
    }
}

/// Reduces the filtration's boundary matrix and extracts the barcode.
/// Intervals are reported for dimensions 0..=max_dim of the complex.
pub fn reduce_persistence(complex: &FilteredComplex) -> Result<Barcode, TdaError> {
    let n = complex.len();
    let simplices = complex.simplices();
    let report_max = complex.max_dim();
    let top = simplices.iter().map(|s| s.dim()).max().unwrap_or(0);

    // columns of each dimension, already in filtration order
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); top as usize + 1];
    for (j, s) in simplices.iter().enumerate() {
        by_dim[s.dim() as usize].push(j as u32);
    }

    let mut intervals = Vec::new();
    // rows paired by a higher-dimensional column; their own columns are
    // guaranteed to reduce to zero and are skipped (the "clearing" step)
    let mut cleared = vec![false; n];
    let mut scratch: Vec<u32> = Vec::new();

    for d in (1..=top).rev() {
        let mut pivot_col: HashMap<u32, Vec<u32>> = HashMap::new();
        for &j in &by_dim[d as usize] {
            if cleared[j as usize] {
                continue;
            }
            let mut col = complex.boundary_rows(j as usize)?;
            loop {
                let Some(&low) = col.last() else {
                    // creates a class nothing above ever kills
                    if d <= report_max {
                        intervals.push(Interval {
                            dim: d,
                            birth: simplices[j as usize].filtration(),
                            death: None,
                        });
                    }
                    break;
                };
                match pivot_col.get(&low) {
                    Some(other) => xor_into(&mut col, other, &mut scratch),
                    None => {
                        let birth = simplices[low as usize].filtration();
                        let death = simplices[j as usize].filtration();
                        if death > birth {
                            intervals.push(Interval {
                                dim: d - 1,
                                birth,
                                death: Some(death),
                            });
                        }
                        cleared[low as usize] = true;
                        pivot_col.insert(low, col);
                        break;
                    }
                }
            }
        }
    }

    // vertices never paired from above are the surviving components
    for &j in &by_dim[0] {
        if !cleared[j as usize] {
            intervals.push(Interval {
                dim: 0,
                birth: simplices[j as usize].filtration(),
                death: None,
            });
        }
    }

    intervals.sort_by(|a, b| {
        let key = |iv: &Interval| (iv.dim, iv.birth, iv.death.unwrap_or(f64::INFINITY));
        key(a).partial_cmp(&key(b)).expect("finite births")
    });
    Ok(Barcode { intervals })
}

/// Symmetric difference of two sorted index sets, in place.
fn xor_into(a: &mut Vec<u32>, b: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&a[i..]);
    scratch.extend_from_slice(&b[j..]);
    std::mem::swap(a, scratch);
}
