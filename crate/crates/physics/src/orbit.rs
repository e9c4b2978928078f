//! Two balls on circular orbits, observed relative to one another.
//!
//! Ball 1 circles in the z = 0 plane at unit speed starting from (1,0,0);
//! ball 2 circles in the y = 0 plane at twice the speed starting from
//! (0,0,1). The observation is ball 1's position in ball 2's (translated,
//! non-rotating) frame. The 1:2 resonance closes the relative curve after
//! one period and makes it cross itself, giving a figure-eight.

use crate::{Dataset, PhysicsError};
use std::f64::consts::TAU;
use tvae_core::{Rng, System};

#[derive(Debug, Clone, Copy)]
pub struct OrbitConfig {
    pub radius: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            radius: 1.0,
            omega1: 1.0,
            omega2: 2.0,
        }
    }
}

impl OrbitConfig {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if self.omega2 != 2.0 * self.omega1 {
            return Err(PhysicsError::BadSpeeds(self.omega1, self.omega2));
        }
        Ok(())
    }
}

/// Relative position of ball 1 seen from ball 2 at time `t`.
pub fn orbit_observation(cfg: &OrbitConfig, t: f64) -> [f64; 3] {
    let r = cfg.radius;
    let a = cfg.omega1 * t;
    let b = cfg.omega2 * t;
    let ball1 = [r * a.cos(), r * a.sin(), 0.0];
    let ball2 = [r * b.sin(), 0.0, r * b.cos()];
    [ball1[0] - ball2[0], ball1[1] - ball2[1], ball1[2] - ball2[2]]
}

/// Samples `n` times uniformly from one period [0, 2pi) and emits the
/// relative positions. Hidden label: the time.
pub fn gen_orbit(cfg: &OrbitConfig, n: usize, rng: &mut Rng) -> Result<Dataset, PhysicsError> {
    cfg.validate()?;
    if n == 0 {
        return Err(PhysicsError::EmptyRequest);
    }
    let mut obs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let t = rng.uniform(0.0, TAU);
        obs.push(orbit_observation(cfg, t).to_vec());
        labels.push(vec![t]);
    }
    Dataset::build(
        System::Orbit,
        obs,
        labels,
        "t",
        &[
            ("radius", cfg.radius.to_string()),
            ("omega1", cfg.omega1.to_string()),
            ("omega2", cfg.omega2.to_string()),
        ],
    )
}
