//! Filtered Vietoris-Rips complexes.
//!
//! A simplex enters the filtration at the largest pairwise distance among
//! its vertices (0 for vertices). The complex stores every simplex up to
//! dimension `max_dim + 1` with distance at most the radius cutoff, sorted
//! by (filtration value, dimension, vertex order). That sort puts every
//! face before its cofaces, which is what the reduction relies on.

use crate::TdaError;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use tvae_core::{euclidean, PointCloud};

/// Largest number of simplices a single complex may hold. Crossing it is a
/// resource error, not a correctness one; callers should subsample harder.
pub const MAX_SIMPLICES: usize = 20_000_000;

/// Simplex of dimension at most 3, i.e. at most 4 vertices. Vertices are
/// stored strictly increasing in a fixed-size array; slots past `dim` are
/// unused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    verts: [u32; 4],
    dim: u8,
    filtration: f64,
}

impl Simplex {
    pub fn new(vertices: &[u32], filtration: f64) -> Result<Self, TdaError> {
        if vertices.is_empty() || vertices.len() > 4 {
            return Err(TdaError::BadSimplex(vertices.to_vec()));
        }
        if !vertices.windows(2).all(|w| w[0] < w[1]) {
            return Err(TdaError::BadSimplex(vertices.to_vec()));
        }
        if !filtration.is_finite() || filtration < 0.0 {
            return Err(TdaError::BadFiltration(filtration));
        }
        let mut verts = [0u32; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        Ok(Simplex {
            verts,
            dim: (vertices.len() - 1) as u8,
            filtration,
        })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts[..=self.dim as usize]
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn filtration(&self) -> f64 {
        self.filtration
    }

    /// The facets obtained by deleting one vertex each, as vertex lists.
    /// Over GF(2) every facet carries coefficient 1. Empty for vertices.
    pub fn boundary(&self) -> Vec<Vec<u32>> {
        if self.dim == 0 {
            return Vec::new();
        }
        let vs = self.vertices();
        (0..vs.len())
            .map(|skip| {
                vs.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect()
    }

    /// Packs the vertex set into a lookup key. Vertices are offset by one
    /// so unused slots (zero) cannot collide with vertex 0.
    fn key(&self) -> u64 {
        pack_key(self.vertices())
    }

    fn sort_key(&self) -> (f64, u8, [u32; 4]) {
        (self.filtration, self.dim, self.verts)
    }
}

fn pack_key(vertices: &[u32]) -> u64 {
    let mut key = 0u64;
    for &v in vertices {
        debug_assert!(v < u16::MAX as u32);
        key = (key << 16) | (v as u64 + 1);
    }
    key
}

/// Simplices sorted in filtration order, closed under taking faces.
/// `max_dim` is the largest homology dimension the complex answers for;
/// simplices run one dimension higher so that classes in dimension
/// `max_dim` can still die.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    index: HashMap<u64, u32>,
    max_dim: u8,
}

impl FilteredComplex {
    /// Builds a complex from an explicit simplex list. The list is sorted
    /// into filtration order; it must be duplicate-free, closed under
    /// faces, and contain nothing above dimension `max_dim + 1`.
    pub fn from_simplices(mut simplices: Vec<Simplex>, max_dim: u8) -> Result<Self, TdaError> {
        if !(1..=2).contains(&max_dim) {
            return Err(TdaError::BadMaxDim(max_dim));
        }
        simplices.sort_by(|a, b| {
            a.sort_key()
                .partial_cmp(&b.sort_key())
                .expect("filtration values are finite")
        });
        let mut index = HashMap::with_capacity(simplices.len());
        for (i, s) in simplices.iter().enumerate() {
            if s.dim > max_dim + 1 {
                return Err(TdaError::BadSimplex(s.vertices().to_vec()));
            }
            if index.insert(s.key(), i as u32).is_some() {
                return Err(TdaError::DuplicateSimplex(s.vertices().to_vec()));
            }
        }
        let complex = FilteredComplex {
            simplices,
            index,
            max_dim,
        };
        complex.check_closure()?;
        Ok(complex)
    }

    /// Verifies that every facet of every simplex is present with a
    /// filtration value no larger than its coface's.
    pub fn check_closure(&self) -> Result<(), TdaError> {
        for s in &self.simplices {
            for face in s.boundary() {
                match self.index.get(&pack_key(&face)) {
                    Some(&i) if self.simplices[i as usize].filtration <= s.filtration => {}
                    _ => return Err(TdaError::NotClosed(s.vertices().to_vec())),
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> u8 {
        self.max_dim
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Simplex counts indexed by dimension 0..=3.
    pub fn counts_by_dim(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for s in &self.simplices {
            counts[s.dim as usize] += 1;
        }
        counts
    }

    /// Boundary of simplex `j` as sorted positions into the filtration
    /// order. Fails if a face is missing, which cannot happen for a
    /// complex built by this module.
    pub(crate) fn boundary_rows(&self, j: usize) -> Result<Vec<u32>, TdaError> {
        let s = &self.simplices[j];
        let mut rows = Vec::with_capacity(s.dim as usize + 1);
        for face in s.boundary() {
            let &i = self
                .index
                .get(&pack_key(&face))
                .ok_or_else(|| TdaError::NotClosed(s.vertices().to_vec()))?;
            rows.push(i);
        }
        rows.sort_unstable();
        Ok(rows)
    }
}

/// Farthest-point subsample of `count` indices, seeded at index 0. Each
/// round adds the point farthest from everything chosen so far (smallest
/// index on ties), so the sample spreads across the cloud instead of
/// following its density.
pub fn landmark_indices(cloud: &PointCloud, count: usize) -> Vec<usize> {
    let n = cloud.len();
    if count >= n {
        return (0..n).collect();
    }
    let mut chosen = Vec::with_capacity(count);
    let mut min_dist = vec![f64::INFINITY; n];
    let mut next = 0usize;
    for _ in 0..count {
        chosen.push(next);
        let p = cloud.point(next);
        let mut best = (0usize, -1.0f64);
        for (i, md) in min_dist.iter_mut().enumerate() {
            let d = euclidean(cloud.point(i), p);
            if d < *md {
                *md = d;
            }
            if *md > best.1 {
                best = (i, *md);
            }
        }
        next = best.0;
    }
    chosen
}

/// Builds the Vietoris-Rips filtration of `cloud` up to homology dimension
/// `max_dim`, dropping simplices whose filtration value exceeds
/// `max_radius`. When the cloud has more than `landmarks` points it is
/// first reduced by farthest-point sampling.
pub fn build_vr(
    cloud: &PointCloud,
    max_dim: u8,
    max_radius: f64,
    landmarks: usize,
) -> Result<FilteredComplex, TdaError> {
    if !(1..=2).contains(&max_dim) {
        return Err(TdaError::BadMaxDim(max_dim));
    }
    if !(max_radius > 0.0) || !max_radius.is_finite() {
        return Err(TdaError::BadRadius(max_radius));
    }
    let effective = landmarks.min(cloud.len());
    if effective < 2 {
        return Err(TdaError::TooFewLandmarks(effective));
    }
    let picks = landmark_indices(cloud, effective);
    let points: Vec<&[f64]> = picks.iter().map(|&i| cloud.point(i)).collect();
    let dists = distance_matrix(&points);
    build_vr_from_distances(&dists, points.len(), max_dim, max_radius)
}

fn distance_matrix(points: &[&[f64]]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n * n];
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| euclidean(points[i], points[j])).collect())
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        d[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    d
}

/// Clique enumeration over the radius graph. Works on a dense distance
/// matrix of `n` points; the caller has already subsampled.
pub(crate) fn build_vr_from_distances(
    dists: &[f64],
    n: usize,
    max_dim: u8,
    max_radius: f64,
) -> Result<FilteredComplex, TdaError> {
    if n >= u16::MAX as usize {
        return Err(TdaError::TooManyPoints(n));
    }
    let d = |i: usize, j: usize| dists[i * n + j];
    let top = max_dim + 1;

    // Sorted out-neighbors above each vertex; cliques are enumerated once
    // each, in increasing vertex order.
    let nbrs: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .filter(|&j| d(i, j) <= max_radius)
                .map(|j| j as u32)
                .collect()
        })
        .collect();

    let mut simplices: Vec<Simplex> = Vec::with_capacity(n * 8);
    for i in 0..n {
        simplices.push(Simplex::new(&[i as u32], 0.0)?);
    }

    // Shared running count so enumeration aborts as soon as the cap is hit,
    // before a dense dimension gets materialized.
    let counted = AtomicUsize::new(n);
    let charge = |out: &mut Vec<Simplex>, s: Simplex| -> Result<(), TdaError> {
        if counted.fetch_add(1, Ordering::Relaxed) >= MAX_SIMPLICES {
            return Err(TdaError::TooLarge {
                have: counted.load(Ordering::Relaxed),
                cap: MAX_SIMPLICES,
            });
        }
        out.push(s);
        Ok(())
    };

    let per_vertex: Vec<Vec<Simplex>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let iu = i as u32;
            for &j in &nbrs[i] {
                let ju = j as usize;
                let dij = d(i, ju);
                charge(&mut out, Simplex::new(&[iu, j], dij).expect("ordered pair"))?;
                if top < 2 {
                    continue;
                }
                // every member of a clique is pairwise within max_radius
                // already, so filtration values never need re-checking
                let common: Vec<u32> = intersect(&nbrs[i], &nbrs[ju]);
                for &k in &common {
                    let ku = k as usize;
                    let filt = dij.max(d(i, ku)).max(d(ju, ku));
                    charge(
                        &mut out,
                        Simplex::new(&[iu, j, k], filt).expect("ordered triple"),
                    )?;
                    if top < 3 {
                        continue;
                    }
                    for &l in intersect(&common, &nbrs[ku]).iter() {
                        let lu = l as usize;
                        let filt = filt.max(d(i, lu)).max(d(ju, lu)).max(d(ku, lu));
                        charge(
                            &mut out,
                            Simplex::new(&[iu, j, k, l], filt).expect("ordered quad"),
                        )?;
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_, TdaError>>()?;

    for batch in per_vertex {
        simplices.extend(batch);
    }

    FilteredComplex::from_simplices(simplices, max_dim)
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
