//! Brute-force Betti numbers at a single scale.
//!
//! This is the test oracle for the barcode reduction. It shares nothing
//! with that code path: simplices of the complex restricted to filtration
//! value <= epsilon are re-indexed from scratch here, boundary matrices
//! are laid out as dense bit rows, and each Betti number comes straight
//! from the rank-nullity count: beta_k = dim C_k - rank d_k - rank d_{k+1}.
//!
//! Dense Gaussian elimination caps the workable size, hence the simplex
//! limit. Anything bigger belongs to the barcode path.

use crate::complex::FilteredComplex;
use crate::TdaError;
use std::collections::BTreeMap;
use tvae_core::BettiVector;

/// Largest restricted complex the oracle will accept.
pub const ORACLE_MAX_SIMPLICES: usize = 5000;

/// Betti numbers (dimensions 0..=2) of the subcomplex at scale `epsilon`,
/// by direct rank computation over GF(2).
pub fn betti_oracle(complex: &FilteredComplex, epsilon: f64) -> Result<BettiVector, TdaError> {
    // per-dimension vertex tuples of the restricted complex
    let mut cells: [Vec<Vec<u32>>; 4] = Default::default();
    let mut total = 0usize;
    for s in complex.simplices() {
        if s.filtration() <= epsilon {
            cells[s.dim() as usize].push(s.vertices().to_vec());
            total += 1;
        }
    }
    if total > ORACLE_MAX_SIMPLICES {
        return Err(TdaError::OracleTooLarge(total));
    }

    // positions of the k-cells, keyed by vertex tuple
    let index: [BTreeMap<&[u32], usize>; 4] = std::array::from_fn(|k| {
        cells[k]
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_slice(), i))
            .collect()
    });

    let mut rank = [0usize; 4]; // rank[k] = rank of d_k, k >= 1
    for k in 1..=3usize {
        rank[k] = boundary_rank(&cells[k], &index[k - 1]);
    }

    let betti = |k: usize| {
        let chains = cells[k].len();
        let killed = rank[k];
        let bounded = if k < 3 { rank[k + 1] } else { 0 };
        (chains - killed - bounded) as u32
    };
    Ok(BettiVector::new(betti(0), betti(1), betti(2)))
}

/// Rank over GF(2) of the boundary map sending each k-cell to the sum of
/// its facets. Columns are bitsets over the (k-1)-cells; elimination keeps
/// one column per pivot row.
fn boundary_rank(cols: &[Vec<u32>], row_index: &BTreeMap<&[u32], usize>) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let words = row_index.len().div_ceil(64);
    let mut pivots: Vec<(usize, Vec<u64>)> = Vec::new();

    for verts in cols {
        let mut bits = vec![0u64; words];
        for skip in 0..verts.len() {
            let face: Vec<u32> = verts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, v)| *v)
                .collect();
            let row = row_index[face.as_slice()];
            bits[row / 64] ^= 1u64 << (row % 64);
        }
        while let Some(high) = highest_bit(&bits) {
            match pivots.iter().find(|(r, _)| *r == high) {
                Some((_, other)) => {
                    for (b, o) in bits.iter_mut().zip(other) {
                        *b ^= o;
                    }
                }
                None => {
                    pivots.push((high, bits));
                    break;
                }
            }
        }
    }
    pivots.len()
}

fn highest_bit(bits: &[u64]) -> Option<usize> {
    for (w, &word) in bits.iter().enumerate().rev() {
        if word != 0 {
            return Some(w * 64 + 63 - word.leading_zeros() as usize);
        }
    }
    None
}
