//! Structural properties of the homology machinery, checked on random
//! inputs: the boundary of a boundary vanishes, the fast reduction agrees
//! with the brute-force rank oracle, and component counts shrink as the
//! scale grows.

use std::collections::HashMap;
use tvae_core::{Meta, PointCloud, Rng};
use tvae_tda::complex::Simplex;
use tvae_tda::{betti_oracle, build_vr, reduce_persistence};

fn random_simplex(rng: &mut Rng) -> Simplex {
    let dim = rng.below(4);
    let mut verts: Vec<u32> = Vec::new();
    while verts.len() < dim + 1 {
        let v = rng.below(50) as u32;
        if !verts.contains(&v) {
            verts.push(v);
        }
    }
    verts.sort_unstable();
    Simplex::new(&verts, rng.uniform(0.0, 10.0)).unwrap()
}

#[test]
fn boundary_of_boundary_vanishes() {
    let mut rng = Rng::stream(77, "dd-zero");
    for _ in 0..1000 {
        let s = random_simplex(&mut rng);
        // GF(2) chain: a face is present iff it appears an odd number of
        // times among the facets of the facets
        let mut chain: HashMap<Vec<u32>, u32> = HashMap::new();
        for face in s.boundary() {
            if face.len() < 2 {
                continue;
            }
            let face = Simplex::new(&face, s.filtration()).unwrap();
            for sub in face.boundary() {
                *chain.entry(sub).or_insert(0) += 1;
            }
        }
        assert!(
            chain.values().all(|&count| count % 2 == 0),
            "d(d({:?})) != 0",
            s.vertices()
        );
    }
}

fn random_cloud(rng: &mut Rng, max_points: usize) -> PointCloud {
    let n = 4 + rng.below(max_points - 3);
    let dim = 2 + rng.below(2);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect())
        .collect();
    PointCloud::new(pts, Meta::default()).unwrap()
}

#[test]
fn reduction_matches_oracle_on_random_clouds() {
    let mut rng = Rng::stream(78, "oracle-eq");
    for round in 0..40 {
        let cloud = random_cloud(&mut rng, 14);
        let radius = rng.uniform(0.3, 2.0);
        let cx = build_vr(&cloud, 2, radius, cloud.len()).unwrap();
        let barcode = reduce_persistence(&cx).unwrap();
        for _ in 0..4 {
            let eps = rng.uniform(0.0, radius * 1.1);
            let fast = barcode.betti_at(eps);
            let slow = betti_oracle(&cx, eps).unwrap();
            assert_eq!(fast, slow, "round {round}, eps {eps}");
        }
    }
}

#[test]
fn component_count_is_monotone_in_scale() {
    let mut rng = Rng::stream(79, "monotone");
    for _ in 0..10 {
        let cloud = random_cloud(&mut rng, 20);
        let cx = build_vr(&cloud, 1, 3.0, cloud.len()).unwrap();
        let barcode = reduce_persistence(&cx).unwrap();
        let mut prev = u32::MAX;
        for step in 0..40 {
            let b0 = barcode.betti_at(0.08 * step as f64).b0;
            assert!(b0 <= prev);
            prev = b0;
        }
    }
}
