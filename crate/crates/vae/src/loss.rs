//! Loss assembly: reconstruction error, manifold penalty on the topological
//! coordinates, and a Gaussian prior on the general coordinates.
//!
//! Every evaluator returns the value together with its exact gradient, so the
//! training loop can chain them into the network backward passes without any
//! numeric differentiation.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use tvae_core::{CoreError, LatentLayout, TermKind};

use crate::VaeError;

/// Pinch constant of the lemniscate penalty: the zero set of
/// `(z1^2+z2^2)^2 - c (z1^2 - z2^2)` is a figure eight whose lobes lie along
/// the z1 axis and meet at the origin.
pub const LEMNISCATE_C: f64 = 0.01;

/// How reconstruction error is measured. `SquaredNorm` is the default and the
/// form the optimizer sees; `Norm` (plain Euclidean distance) is kept as an
/// alternative for experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconMode {
    #[default]
    SquaredNorm,
    Norm,
}

impl fmt::Display for ReconMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReconMode::SquaredNorm => "squared-norm",
            ReconMode::Norm => "norm",
        })
    }
}

impl FromStr for ReconMode {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "squared-norm" => Ok(ReconMode::SquaredNorm),
            "norm" => Ok(ReconMode::Norm),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown reconstruction mode `{other}` (expected squared-norm or norm)"
            ))),
        }
    }
}

/// Weights of the three loss ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub recon_mode: ReconMode,
}

impl LossConfig {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, VaeError> {
        let cfg = LossConfig {
            alpha,
            beta,
            gamma,
            recon_mode: ReconMode::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mode(mut self, mode: ReconMode) -> Self {
        self.recon_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), VaeError> {
        for (name, value) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(VaeError::BadWeight { name, value });
            }
        }
        Ok(())
    }
}

/// One loss evaluation broken into its ingredients. `recon`, `topo`, and
/// `gpv` are the raw term values; `total` is their weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub total: f64,
    pub recon: f64,
    pub topo: f64,
    pub gpv: f64,
}

impl LossTerms {
    pub fn zero() -> Self {
        LossTerms {
            total: 0.0,
            recon: 0.0,
            topo: 0.0,
            gpv: 0.0,
        }
    }

    pub fn accumulate(&mut self, other: &LossTerms) {
        self.total += other.total;
        self.recon += other.recon;
        self.topo += other.topo;
        self.gpv += other.gpv;
    }

    pub fn scale(&mut self, factor: f64) {
        self.total *= factor;
        self.recon *= factor;
        self.topo *= factor;
        self.gpv *= factor;
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
            && self.recon.is_finite()
            && self.topo.is_finite()
            && self.gpv.is_finite()
    }
}

/// Subgradient convention at the absolute-value kink: pick 0. The kink is the
/// target manifold itself, so a zero step there is the right fixed point.
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Manifold penalty on the topological coordinates. Zero exactly on the
/// target manifold, positive off it. Returns the value and its gradient
/// with respect to `z_t`.
pub fn topo_term(term: TermKind, z_t: &[f64]) -> Result<(f64, Vec<f64>), VaeError> {
    if z_t.len() != term.arity() {
        return Err(VaeError::ArityMismatch {
            term: term.name(),
            expected: term.arity(),
            got: z_t.len(),
        });
    }
    let (inner, inner_grad) = match term {
        TermKind::Circle => {
            let s = z_t[0] * z_t[0] + z_t[1] * z_t[1] - 1.0;
            (s, vec![2.0 * z_t[0], 2.0 * z_t[1]])
        }
        TermKind::Sphere => {
            let s = z_t[0] * z_t[0] + z_t[1] * z_t[1] + z_t[2] * z_t[2] - 1.0;
            (s, vec![2.0 * z_t[0], 2.0 * z_t[1], 2.0 * z_t[2]])
        }
        TermKind::Lemniscate => {
            let (z1, z2) = (z_t[0], z_t[1]);
            let r2 = z1 * z1 + z2 * z2;
            let s = r2 * r2 - LEMNISCATE_C * (z1 * z1 - z2 * z2);
            let g1 = 4.0 * z1 * r2 - 2.0 * LEMNISCATE_C * z1;
            let g2 = 4.0 * z2 * r2 + 2.0 * LEMNISCATE_C * z2;
            (s, vec![g1, g2])
        }
    };
    let orientation = sign(inner);
    let grad = inner_grad.into_iter().map(|g| orientation * g).collect();
    Ok((inner.abs(), grad))
}

/// Gaussian prior cost on the general coordinates: negative log density of a
/// standard normal with the constant dropped, so `0.5 * ||z_g||^2`. The
/// gradient is `z_g` itself.
pub fn gpv_penalty(z_g: &[f64]) -> (f64, Vec<f64>) {
    let value = 0.5 * z_g.iter().map(|v| v * v).sum::<f64>();
    (value, z_g.to_vec())
}

fn recon_term(mode: ReconMode, x: &[f64], x_hat: &[f64]) -> (f64, Vec<f64>) {
    let squared: f64 = x
        .iter()
        .zip(x_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    match mode {
        ReconMode::SquaredNorm => {
            let grad = x_hat.iter().zip(x).map(|(h, a)| 2.0 * (h - a)).collect();
            (squared, grad)
        }
        ReconMode::Norm => {
            let norm = squared.sqrt();
            let grad = if norm > 0.0 {
                x_hat.iter().zip(x).map(|(h, a)| (h - a) / norm).collect()
            } else {
                vec![0.0; x.len()]
            };
            (norm, grad)
        }
    }
}

/// Full loss for one sample. The latent vector `z` holds the topological
/// coordinates first, then the general ones, per `layout`. Returns the term
/// breakdown plus gradients with respect to the reconstruction and to `z`.
pub fn vae_loss(
    cfg: &LossConfig,
    layout: &LatentLayout,
    x: &[f64],
    x_hat: &[f64],
    z: &[f64],
) -> Result<(LossTerms, Vec<f64>, Vec<f64>), VaeError> {
    cfg.validate()?;
    if x_hat.len() != x.len() {
        return Err(VaeError::LengthMismatch {
            expected: x.len(),
            got: x_hat.len(),
        });
    }
    if z.len() != layout.latent_dim() {
        return Err(VaeError::LengthMismatch {
            expected: layout.latent_dim(),
            got: z.len(),
        });
    }
    let (z_t, z_g) = z.split_at(layout.n_tpv);
    let (recon, recon_grad) = recon_term(cfg.recon_mode, x, x_hat);
    let (topo, topo_grad) = topo_term(layout.term, z_t)?;
    let (gpv, gpv_grad) = gpv_penalty(z_g);

    let terms = LossTerms {
        total: cfg.alpha * recon + cfg.beta * topo + cfg.gamma * gpv,
        recon,
        topo,
        gpv,
    };
    let grad_x_hat = recon_grad.into_iter().map(|g| cfg.alpha * g).collect();
    let mut grad_z = Vec::with_capacity(z.len());
    grad_z.extend(topo_grad.into_iter().map(|g| cfg.beta * g));
    grad_z.extend(gpv_grad.into_iter().map(|g| cfg.gamma * g));
    Ok((terms, grad_x_hat, grad_z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tvae_core::Rng;
    use tvae_nn::numdiff;

    #[test]
    fn term_values_at_reference_points() {
        let (v, _) = topo_term(TermKind::Circle, &[1.0, 0.0]).unwrap();
        assert_eq!(v, 0.0);
        let (v, _) = topo_term(TermKind::Circle, &[0.0, 0.0]).unwrap();
        assert_eq!(v, 1.0);
        let (v, _) = topo_term(TermKind::Sphere, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(v, 0.0);
        let (v, g) = topo_term(TermKind::Lemniscate, &[0.0, 0.0]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn terms_vanish_on_their_manifolds_and_not_off_them() {
        let mut rng = Rng::stream(11, "loss-manifold");
        for _ in 0..200 {
            let theta = rng.uniform(0.0, std::f64::consts::TAU);
            let phi = rng.uniform(0.0, std::f64::consts::TAU);

            let circle = [theta.cos(), theta.sin()];
            let (v, _) = topo_term(TermKind::Circle, &circle).unwrap();
            assert!(v < 1e-12);

            let sphere = [
                phi.sin() * theta.cos(),
                phi.sin() * theta.sin(),
                phi.cos(),
            ];
            let (v, _) = topo_term(TermKind::Sphere, &sphere).unwrap();
            assert!(v < 1e-12);

            // Polar form of the lemniscate: r^2 = c cos(2t) where defined.
            let c2 = (2.0 * theta).cos();
            if c2 > 1e-3 {
                let r = (LEMNISCATE_C * c2).sqrt();
                let lem = [r * theta.cos(), r * theta.sin()];
                let (v, _) = topo_term(TermKind::Lemniscate, &lem).unwrap();
                assert!(v < 1e-12);
            }

            let off = [circle[0] * 1.3, circle[1] * 1.3];
            let (v, _) = topo_term(TermKind::Circle, &off).unwrap();
            assert!(v > 0.1);
        }
    }

    #[test]
    fn term_is_nonnegative_everywhere() {
        let mut rng = Rng::stream(12, "loss-nonneg");
        for _ in 0..500 {
            for term in [TermKind::Circle, TermKind::Sphere, TermKind::Lemniscate] {
                let z: Vec<f64> = (0..term.arity()).map(|_| rng.uniform(-2.0, 2.0)).collect();
                let (v, _) = topo_term(term, &z).unwrap();
                assert!(v >= 0.0);
            }
        }
    }

    #[test]
    fn gpv_penalty_reference_values() {
        assert_eq!(gpv_penalty(&[]).0, 0.0);
        assert_eq!(gpv_penalty(&[0.0]).0, 0.0);
        assert_eq!(gpv_penalty(&[1.0]).0, 0.5);
        let (v, g) = gpv_penalty(&[3.0, 4.0]);
        assert_eq!(v, 12.5);
        assert_eq!(g, vec![3.0, 4.0]);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        assert!(topo_term(TermKind::Sphere, &[1.0, 0.0]).is_err());
        assert!(topo_term(TermKind::Circle, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn term_gradients_match_central_differences() {
        let mut rng = Rng::stream(13, "loss-grad");
        for term in [TermKind::Circle, TermKind::Sphere, TermKind::Lemniscate] {
            let mut checked = 0;
            while checked < 20 {
                let z: Vec<f64> = (0..term.arity()).map(|_| rng.uniform(-1.5, 1.5)).collect();
                let (v, analytic) = topo_term(term, &z).unwrap();
                // Stay away from the kink, where the derivative is not defined.
                if v < 1e-3 {
                    continue;
                }
                let numeric =
                    numdiff::gradient(|p| topo_term(term, p).unwrap().0, &z, 1e-5);
                let err = numdiff::max_rel_error(&analytic, &numeric, 1e-6);
                assert!(err < 1e-4, "{term}: rel error {err} at {z:?}");
                checked += 1;
            }
        }
    }

    #[test]
    fn full_loss_gradients_match_central_differences() {
        let mut rng = Rng::stream(14, "loss-full-grad");
        let layouts = [
            LatentLayout::new(TermKind::Circle, 2, 1),
            LatentLayout::new(TermKind::Lemniscate, 2, 2),
            LatentLayout::new(TermKind::Sphere, 3, 1),
        ];
        for layout in layouts {
            let cfg = LossConfig::new(1.0, 3.0, 7.0).unwrap();
            let mut checked = 0;
            while checked < 20 {
                let x: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let x_hat: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let z: Vec<f64> = (0..layout.latent_dim())
                    .map(|_| rng.uniform(-1.5, 1.5))
                    .collect();
                let (terms, gx, gz) = vae_loss(&cfg, &layout, &x, &x_hat, &z).unwrap();
                if terms.topo < 1e-3 {
                    continue;
                }
                // Differentiate jointly in (x_hat, z).
                let mut point = x_hat.clone();
                point.extend_from_slice(&z);
                let numeric = numdiff::gradient(
                    |p| {
                        let (h, rest) = p.split_at(x.len());
                        vae_loss(&cfg, &layout, &x, h, rest).unwrap().0.total
                    },
                    &point,
                    1e-5,
                );
                let mut analytic = gx.clone();
                analytic.extend_from_slice(&gz);
                let err = numdiff::max_rel_error(&analytic, &numeric, 1e-6);
                assert!(err < 1e-4, "rel error {err}");
                checked += 1;
            }
        }
    }

    #[test]
    fn zero_beta_gamma_reduces_to_plain_reconstruction() {
        let layout = LatentLayout::new(TermKind::Circle, 2, 1);
        let cfg = LossConfig::new(1.0, 0.0, 0.0).unwrap();
        let x = [0.2, -0.4, 1.0];
        let x_hat = [0.0, 0.1, 0.9];
        let z = [5.0, 5.0, 5.0];
        let (terms, _, gz) = vae_loss(&cfg, &layout, &x, &x_hat, &z).unwrap();
        let expected: f64 = x
            .iter()
            .zip(&x_hat)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        assert_eq!(terms.total, expected);
        assert!(gz.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn loss_is_invariant_under_gpv_permutation() {
        let layout = LatentLayout::new(TermKind::Circle, 2, 3);
        let cfg = LossConfig::new(1.0, 2.0, 5.0).unwrap();
        let x = [0.3, 0.1];
        let x_hat = [0.2, 0.0];
        let z = [0.6, -0.8, 1.0, -2.0, 0.5];
        let z_permuted = [0.6, -0.8, -2.0, 0.5, 1.0];
        let (a, _, _) = vae_loss(&cfg, &layout, &x, &x_hat, &z).unwrap();
        let (b, _, _) = vae_loss(&cfg, &layout, &x, &x_hat, &z_permuted).unwrap();
        assert_eq!(a.total, b.total);
    }

    #[test]
    fn perfect_sample_has_zero_loss() {
        let layout = LatentLayout::new(TermKind::Sphere, 3, 1);
        let cfg = LossConfig::new(1.0, 1.0, 100.0).unwrap();
        let x = [0.1, 0.2, 0.3];
        let z = [0.0, 0.0, 1.0, 0.0];
        let (terms, gx, gz) = vae_loss(&cfg, &layout, &x, &x, &z).unwrap();
        assert_eq!(terms.total, 0.0);
        assert!(gx.iter().all(|&g| g == 0.0));
        assert!(gz.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn norm_mode_takes_the_square_root() {
        let layout = LatentLayout::new(TermKind::Circle, 2, 0);
        let cfg = LossConfig::new(1.0, 0.0, 0.0).unwrap().with_mode(ReconMode::Norm);
        let x = [0.0, 0.0];
        let x_hat = [3.0, 4.0];
        let z = [1.0, 0.0];
        let (terms, gx, _) = vae_loss(&cfg, &layout, &x, &x_hat, &z).unwrap();
        assert_eq!(terms.recon, 5.0);
        assert_eq!(gx, vec![0.6, 0.8]);
    }

    #[test]
    fn negative_weights_rejected() {
        assert!(LossConfig::new(-1.0, 0.0, 0.0).is_err());
        assert!(LossConfig::new(1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn length_mismatches_rejected() {
        let layout = LatentLayout::new(TermKind::Circle, 2, 1);
        let cfg = LossConfig::new(1.0, 1.0, 1.0).unwrap();
        assert!(vae_loss(&cfg, &layout, &[0.0; 3], &[0.0; 2], &[0.0; 3]).is_err());
        assert!(vae_loss(&cfg, &layout, &[0.0; 3], &[0.0; 3], &[0.0; 4]).is_err());
    }
}
