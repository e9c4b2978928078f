//! Experiment configuration: which system, which latent layout, which loss
//! weights, and the training schedule.

use crate::cloud::BettiVector;
use crate::CoreError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The three toy systems with known topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Oscillator,
    Orbit,
    Qubit,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::Oscillator => "oscillator",
            System::Orbit => "orbit",
            System::Qubit => "qubit",
        }
    }

    /// Observation dimension m.
    pub fn observation_dim(self) -> usize {
        match self {
            System::Oscillator | System::Orbit => 3,
            System::Qubit => 5,
        }
    }

    /// Dimension of the ground-truth hidden labels.
    pub fn hidden_dim(self) -> usize {
        match self {
            System::Oscillator | System::Orbit => 1,
            System::Qubit => 2,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for System {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oscillator" => Ok(System::Oscillator),
            "orbit" => Ok(System::Orbit),
            "qubit" => Ok(System::Qubit),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown system `{other}` (expected oscillator, orbit, or qubit)"
            ))),
        }
    }
}

/// Identifier of the latent manifold penalty. The functional itself lives in
/// the model layer; config only needs the vocabulary and arities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Circle,
    Sphere,
    Lemniscate,
}

impl TermKind {
    /// Number of topological latent coordinates the term constrains.
    pub fn arity(self) -> usize {
        match self {
            TermKind::Circle | TermKind::Lemniscate => 2,
            TermKind::Sphere => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TermKind::Circle => "circle",
            TermKind::Sphere => "sphere",
            TermKind::Lemniscate => "lemniscate",
        }
    }
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TermKind {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "circle" => Ok(TermKind::Circle),
            "sphere" => Ok(TermKind::Sphere),
            "lemniscate" => Ok(TermKind::Lemniscate),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown term `{other}` (expected circle, sphere, or lemniscate)"
            ))),
        }
    }
}

/// Partition of latent coordinates: the leading `n_tpv` coordinates carry the
/// topological constraint, the trailing `n_gpv` ones carry a Gaussian prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentLayout {
    pub n_tpv: usize,
    pub n_gpv: usize,
    pub term: TermKind,
}

impl LatentLayout {
    pub fn new(term: TermKind, n_tpv: usize, n_gpv: usize) -> Self {
        LatentLayout { n_tpv, n_gpv, term }
    }

    pub fn latent_dim(&self) -> usize {
        self.n_tpv + self.n_gpv
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.n_tpv != self.term.arity() {
            return Err(CoreError::InvalidConfig(format!(
                "term `{}` requires {} topological coordinates, layout has {}",
                self.term,
                self.term.arity(),
                self.n_tpv
            )));
        }
        Ok(())
    }
}

/// Optimizer schedule shared by all experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingParams {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Multiplier on the 1/sqrt(fan_in) weight-init bound. The default of 2
    /// gives the untrained encoder enough output spread that the latent image
    /// of a data loop reliably keeps its turning number while the topological
    /// penalty inflates it onto the prior manifold; at 1 the image starts too
    /// close to the origin and training tends to flatten it into an arc.
    pub weight_init_scale: f64,
}

impl Default for TrainingParams {
    fn default() -> Self {
        TrainingParams {
            batch_size: 100,
            learning_rate: 1e-4,
            iterations: 50_000,
            weight_init_scale: 2.0,
        }
    }
}

/// Full run specification for one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: System,
    pub n_samples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub layout: LatentLayout,
    pub training: TrainingParams,
    pub betti_expected: Option<BettiVector>,
}

impl ExperimentConfig {
    /// Stock configuration for a system: loss weights, latent layout, and the
    /// expected Betti numbers of its observation manifold.
    pub fn for_system(system: System) -> Self {
        let (alpha, beta, gamma, layout, betti) = match system {
            System::Oscillator => (
                1.0,
                1.0,
                100.0,
                LatentLayout::new(TermKind::Circle, 2, 1),
                BettiVector::new(1, 1, 0),
            ),
            System::Orbit => (
                1.0,
                100.0,
                100.0,
                LatentLayout::new(TermKind::Lemniscate, 2, 1),
                BettiVector::new(1, 2, 0),
            ),
            System::Qubit => (
                1.0,
                1.0,
                100.0,
                LatentLayout::new(TermKind::Sphere, 3, 1),
                BettiVector::new(1, 0, 1),
            ),
        };
        ExperimentConfig {
            system,
            n_samples: 1000,
            seed: 0,
            alpha,
            beta,
            gamma,
            layout,
            training: TrainingParams::default(),
            betti_expected: Some(betti),
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.n_samples == 0 {
            return Err(CoreError::InvalidConfig("n_samples must be at least 1".into()));
        }
        if self.training.batch_size == 0 || self.training.batch_size > self.n_samples {
            return Err(CoreError::InvalidConfig(format!(
                "batch size {} must be in 1..={}",
                self.training.batch_size, self.n_samples
            )));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !v.is_finite() || v < 0.0 {
                return Err(CoreError::InvalidConfig(format!(
                    "{name} must be a nonnegative finite number, got {v}"
                )));
            }
        }
        if !self.training.learning_rate.is_finite() || self.training.learning_rate <= 0.0 {
            return Err(CoreError::InvalidConfig("learning rate must be positive".into()));
        }
        self.layout.validate()
    }
}
