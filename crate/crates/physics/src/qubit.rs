//! Two-level quantum system measured through five fixed observables.

use crate::{Dataset, PhysicsError};
use num_complex::Complex64;
use std::f64::consts::TAU;
use tvae_core::{Rng, System};

pub type Matrix2 = [[Complex64; 2]; 2];

/// Pure state a|0> + b|1>.
#[derive(Debug, Clone, Copy)]
pub struct QubitState {
    pub a: Complex64,
    pub b: Complex64,
}

impl QubitState {
    /// Bloch-sphere parameterization: a = cos(theta/2), b = e^{i phi} sin(theta/2).
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let half = 0.5 * theta;
        QubitState {
            a: Complex64::new(half.cos(), 0.0),
            b: Complex64::from_polar(half.sin(), phi),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }
}

/// The five measurement operators: the three Pauli-like matrices and two
/// fixed sums of them.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    pub matrices: [Matrix2; 5],
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl ObservableSet {
    pub fn standard() -> Self {
        let o1 = [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let o2 = [[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(0.0, 0.0)]];
        let o3 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
        let o4 = [[c(0.0, 0.0), c(1.0, 1.0)], [c(1.0, -1.0), c(0.0, 0.0)]];
        let o5 = [[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(-1.0, 0.0)]];
        ObservableSet {
            matrices: [o1, o2, o3, o4, o5],
        }
    }
}

fn is_hermitian(m: &Matrix2) -> bool {
    let tol = 1e-12;
    (m[0][0].im.abs() < tol)
        && (m[1][1].im.abs() < tol)
        && ((m[0][1] - m[1][0].conj()).norm() < tol)
}

/// Real expectation value <psi|O|psi>.
///
/// Rejects matrices that are not Hermitian, since only those have real
/// expectations.
pub fn expectation(state: &QubitState, obs: &Matrix2) -> Result<f64, PhysicsError> {
    if !is_hermitian(obs) {
        return Err(PhysicsError::NotHermitian);
    }
    let QubitState { a, b } = *state;
    let value = a.conj() * (obs[0][0] * a + obs[0][1] * b)
        + b.conj() * (obs[1][0] * a + obs[1][1] * b);
    debug_assert!(value.im.abs() < 1e-12, "Hermitian expectation drifted complex");
    Ok(value.re)
}

/// Samples `n` states uniformly over the sphere (cos theta ~ U[-1,1],
/// phi ~ U[0,2pi)) and measures all five observables. Hidden label:
/// (theta, phi).
pub fn gen_qubit(n: usize, rng: &mut Rng) -> Result<Dataset, PhysicsError> {
    if n == 0 {
        return Err(PhysicsError::EmptyRequest);
    }
    let set = ObservableSet::standard();
    let mut obs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let theta = rng.uniform(-1.0, 1.0).acos();
        let phi = rng.uniform(0.0, TAU);
        let state = QubitState::from_angles(theta, phi);
        let row: Result<Vec<f64>, _> =
            set.matrices.iter().map(|m| expectation(&state, m)).collect();
        obs.push(row?);
        labels.push(vec![theta, phi]);
    }
    Dataset::build(System::Qubit, obs, labels, "theta,phi", &[])
}
