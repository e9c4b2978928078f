//! Ball on a line between two springs anchored at x = -1/2 and x = +1/2.
//!
//! With unit mass and unit spring constants the motion is harmonic at
//! frequency sqrt(2). A trajectory is one energy shell, so sampling its
//! phase uniformly traces a closed loop in observation space.

use crate::{Dataset, PhysicsError};
use std::f64::consts::TAU;
use tvae_core::{Rng, System};

#[derive(Debug, Clone, Copy)]
pub struct OscillatorConfig {
    pub mass: f64,
    pub k1: f64,
    pub k2: f64,
    /// Oscillation amplitude. Must satisfy 0 < A <= 1/2 so the ball stays
    /// between the anchors and both spring lengths remain nonnegative.
    pub amplitude: f64,
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        OscillatorConfig {
            mass: 1.0,
            k1: 1.0,
            k2: 1.0,
            amplitude: 0.25,
        }
    }
}

impl OscillatorConfig {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.amplitude > 0.0 && self.amplitude <= 0.5) {
            return Err(PhysicsError::BadAmplitude(self.amplitude));
        }
        Ok(())
    }
}

/// Samples `n` phases uniformly from [0, 2pi) and emits observations
/// (x1, x2, v) where x1, x2 are the ball's distances to the two anchors
/// and v its velocity. Hidden label: the phase.
pub fn gen_oscillator(
    cfg: &OscillatorConfig,
    n: usize,
    rng: &mut Rng,
) -> Result<Dataset, PhysicsError> {
    cfg.validate()?;
    if n == 0 {
        return Err(PhysicsError::EmptyRequest);
    }
    let mut obs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let theta = rng.uniform(0.0, TAU);
        obs.push(observation(cfg, theta));
        labels.push(vec![theta]);
    }
    Dataset::build(
        System::Oscillator,
        obs,
        labels,
        "theta",
        &[("amplitude", cfg.amplitude.to_string())],
    )
}

fn observation(cfg: &OscillatorConfig, theta: f64) -> Vec<f64> {
    let freq = ((cfg.k1 + cfg.k2) / cfg.mass).sqrt();
    let x = cfg.amplitude * theta.cos();
    let v = -cfg.amplitude * freq * theta.sin();
    vec![x + 0.5, 0.5 - x, v]
}

/// Total energy of an observation (x1, x2, v): kinetic plus both springs.
/// The ball position is recovered as x = x1 - 1/2. On generated data this
/// is constant at A^2 + 1/4.
pub fn energy(obs: &[f64], cfg: &OscillatorConfig) -> f64 {
    let x = obs[0] - 0.5;
    let v = obs[2];
    0.5 * cfg.mass * v * v
        + 0.5 * cfg.k1 * (x - 0.5) * (x - 0.5)
        + 0.5 * cfg.k2 * (x + 0.5) * (x + 0.5)
}
