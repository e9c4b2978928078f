//! Deterministic, splittable random streams.
//!
//! Every consumer gets its own stream keyed by `(seed, label)`, so adding or
//! reordering consumers never perturbs the draws of the others. ChaCha is a
//! counter-based generator, which makes the streams platform-stable.

use rand::seq::index;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// A single-owner random stream. Never share one stream between consumers;
/// derive a fresh one per (seed, label) pair instead.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    /// Derives the independent stream for `(seed, label)`.
    pub fn stream(seed: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update([0x1f]); // domain separator between seed and label
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        Rng {
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// Uniform draw from [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform draw from [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0) is undefined");
        self.inner.gen_range(0..n)
    }

    /// Samples `k` distinct indices from [0, n), returned in ascending order
    /// so downstream accumulation runs in a fixed order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} distinct indices from {n}");
        let mut picked = index::sample(&mut self.inner, n, k).into_vec();
        picked.sort_unstable();
        picked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_label_repeat() {
        let mut a = Rng::stream(42, "batch");
        let mut b = Rng::stream(42, "batch");
        for _ in 0..100 {
            assert_eq!(a.next_f64().to_bits(), b.next_f64().to_bits());
        }
    }

    #[test]
    fn labels_split_streams() {
        let mut a = Rng::stream(42, "batch");
        let mut b = Rng::stream(42, "weights");
        assert_ne!(a.next_f64().to_bits(), b.next_f64().to_bits());
    }

    #[test]
    fn seeds_split_streams() {
        let mut a = Rng::stream(42, "batch");
        let mut b = Rng::stream(43, "batch");
        assert_ne!(a.next_f64().to_bits(), b.next_f64().to_bits());
    }

    #[test]
    fn uniform_stays_in_range() {
        let mut r = Rng::stream(7, "range");
        for _ in 0..1000 {
            let v = r.uniform(-2.0, 3.0);
            assert!((-2.0..3.0).contains(&v));
        }
    }

    #[test]
    fn sample_indices_distinct_sorted() {
        let mut r = Rng::stream(7, "sample");
        let idx = r.sample_indices(1000, 100);
        assert_eq!(idx.len(), 100);
        for w in idx.windows(2) {
            assert!(w[0] < w[1]);
        }
    }
}
