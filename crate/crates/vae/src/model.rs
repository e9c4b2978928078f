//! Encoder/decoder pair with the latent layout baked in, plus checkpoint
//! save/load.
//!
//! Both networks use two hidden layers of 20 units. The encoder squashes with
//! tanh, the decoder rectifies with ReLU, and both end in identity layers so
//! latents and reconstructions are unbounded reals. A stored input center is
//! subtracted before encoding and added back to decoder outputs, so the nets
//! always see zero-mean data while callers work in raw observation space.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tvae_core::{LatentLayout, Rng, System};
use tvae_nn::{Activation, Gradients, Mlp};

use crate::loss::{vae_loss, LossConfig, LossTerms};
use crate::VaeError;

/// Version tag at the head of every checkpoint file.
pub const CHECKPOINT_MAGIC: &str = "TVAE1";

const HIDDEN: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct TvaeModel {
    system: System,
    layout: LatentLayout,
    input_center: Vec<f64>,
    encoder: Mlp,
    decoder: Mlp,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    magic: String,
    system: System,
    layout: LatentLayout,
    input_center: Vec<f64>,
    encoder: Mlp,
    decoder: Mlp,
}

impl TvaeModel {
    /// Fresh random model for `system` with the given latent layout. Weight
    /// draws come from `rng` in a fixed order (encoder first), so one seed
    /// pins the whole initialization.
    pub fn new(
        system: System,
        layout: LatentLayout,
        init_scale: f64,
        rng: &mut Rng,
    ) -> Result<Self, VaeError> {
        layout.validate()?;
        let m = system.observation_dim();
        let d = layout.latent_dim();
        let encoder = Mlp::init(
            &[m, HIDDEN, HIDDEN, d],
            &[Activation::Tanh, Activation::Tanh, Activation::Identity],
            init_scale,
            rng,
        )?;
        let decoder = Mlp::init(
            &[d, HIDDEN, HIDDEN, m],
            &[Activation::Relu, Activation::Relu, Activation::Identity],
            init_scale,
            rng,
        )?;
        Ok(TvaeModel {
            system,
            layout,
            input_center: vec![0.0; m],
            encoder,
            decoder,
        })
    }

    pub fn system(&self) -> System {
        self.system
    }

    /// Offset subtracted from every input before encoding and added back to
    /// every decoder output. Zero until [set_input_center](Self::set_input_center)
    /// is called; the trainer sets it to the mean of the training data.
    pub fn input_center(&self) -> &[f64] {
        &self.input_center
    }

    pub fn set_input_center(&mut self, center: &[f64]) -> Result<(), VaeError> {
        if center.len() != self.input_center.len() {
            return Err(VaeError::LengthMismatch {
                expected: self.input_center.len(),
                got: center.len(),
            });
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(VaeError::BadWeight {
                name: "input_center",
                value: center.iter().copied().find(|v| !v.is_finite()).unwrap(),
            });
        }
        self.input_center.copy_from_slice(center);
        Ok(())
    }

    pub fn layout(&self) -> &LatentLayout {
        &self.layout
    }

    pub fn encoder(&self) -> &Mlp {
        &self.encoder
    }

    pub fn decoder(&self) -> &Mlp {
        &self.decoder
    }

    /// Mutable access to (encoder, decoder) for the optimizer.
    pub fn nets_mut(&mut self) -> (&mut Mlp, &mut Mlp) {
        (&mut self.encoder, &mut self.decoder)
    }

    fn shifted(&self, x: &[f64]) -> Result<Vec<f64>, VaeError> {
        if x.len() != self.input_center.len() {
            return Err(VaeError::LengthMismatch {
                expected: self.input_center.len(),
                got: x.len(),
            });
        }
        Ok(x.iter().zip(&self.input_center).map(|(v, c)| v - c).collect())
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>, VaeError> {
        Ok(self.encoder.forward(&self.shifted(x)?)?)
    }

    /// Encode with a unit-variance Gaussian draw added to each latent
    /// coordinate. Not used by the training loop, which treats the encoder
    /// output as the latent directly; kept for experiments.
    pub fn encode_with_noise(&self, x: &[f64], rng: &mut Rng) -> Result<Vec<f64>, VaeError> {
        let mut z = self.encode(x)?;
        for v in &mut z {
            *v += gaussian(rng);
        }
        Ok(z)
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>, VaeError> {
        let mut out = self.decoder.forward(z)?;
        for (o, c) in out.iter_mut().zip(&self.input_center) {
            *o += c;
        }
        Ok(out)
    }

    /// Encoder then decoder; returns the latent and the reconstruction.
    pub fn reconstruct(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), VaeError> {
        let z = self.encode(x)?;
        let x_hat = self.decode(&z)?;
        Ok((z, x_hat))
    }

    /// Loss and exact parameter gradients for one sample. The direct latent
    /// gradient from the penalty terms is added to the one flowing back
    /// through the decoder before the encoder backward pass.
    pub fn loss_and_grads(
        &self,
        cfg: &LossConfig,
        x: &[f64],
    ) -> Result<(LossTerms, Gradients, Gradients), VaeError> {
        let (z, enc_tape) = self.encoder.forward_recorded(&self.shifted(x)?)?;
        let (mut x_hat, dec_tape) = self.decoder.forward_recorded(&z)?;
        for (o, c) in x_hat.iter_mut().zip(&self.input_center) {
            *o += c;
        }
        let (terms, grad_x_hat, grad_z_direct) = vae_loss(cfg, &self.layout, x, &x_hat, &z)?;
        let (dec_grads, dz_through_decoder) = self.decoder.backward(dec_tape, &grad_x_hat)?;
        let dz: Vec<f64> = dz_through_decoder
            .iter()
            .zip(&grad_z_direct)
            .map(|(a, b)| a + b)
            .collect();
        let (enc_grads, _) = self.encoder.backward(enc_tape, &dz)?;
        Ok((terms, enc_grads, dec_grads))
    }

    pub fn save(&self, path: &Path) -> Result<(), VaeError> {
        let ckpt = Checkpoint {
            magic: CHECKPOINT_MAGIC.to_string(),
            system: self.system,
            layout: self.layout,
            input_center: self.input_center.clone(),
            encoder: self.encoder.clone(),
            decoder: self.decoder.clone(),
        };
        let body = serde_json::to_vec(&ckpt).map_err(|e| VaeError::BadCheckpoint {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        fs::write(path, body).map_err(|source| VaeError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, VaeError> {
        let body = fs::read(path).map_err(|source| VaeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let bad = |reason: String| VaeError::BadCheckpoint {
            path: path.to_path_buf(),
            reason,
        };
        let ckpt: Checkpoint =
            serde_json::from_slice(&body).map_err(|e| bad(e.to_string()))?;
        if ckpt.magic != CHECKPOINT_MAGIC {
            return Err(bad(format!(
                "magic `{}` does not match `{CHECKPOINT_MAGIC}`",
                ckpt.magic
            )));
        }
        ckpt.layout.validate()?;
        let m = ckpt.system.observation_dim();
        let d = ckpt.layout.latent_dim();
        let shapes = [
            ("encoder input", ckpt.encoder.input_dim(), m),
            ("encoder output", ckpt.encoder.output_dim(), d),
            ("decoder input", ckpt.decoder.input_dim(), d),
            ("decoder output", ckpt.decoder.output_dim(), m),
        ];
        for (what, got, expected) in shapes {
            if got != expected {
                return Err(bad(format!("{what} dimension {got}, expected {expected}")));
            }
        }
        if ckpt.input_center.len() != m {
            return Err(bad(format!(
                "input center length {}, expected {m}",
                ckpt.input_center.len()
            )));
        }
        if ckpt.input_center.iter().any(|v| !v.is_finite()) {
            return Err(bad("input center holds a non-finite value".into()));
        }
        ckpt.encoder.check_finite()?;
        ckpt.decoder.check_finite()?;
        Ok(TvaeModel {
            system: ckpt.system,
            layout: ckpt.layout,
            input_center: ckpt.input_center,
            encoder: ckpt.encoder,
            decoder: ckpt.decoder,
        })
    }
}

/// Standard normal draw via Box-Muller on two uniforms.
fn gaussian(rng: &mut Rng) -> f64 {
    let u1: f64 = rng.uniform(f64::MIN_POSITIVE, 1.0);
    let u2: f64 = rng.uniform(0.0, std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::ReconMode;
    use tvae_core::TermKind;
    use tvae_nn::numdiff;

    fn fresh(system: System, seed: u64) -> TvaeModel {
        let mut rng = Rng::stream(seed, "model-test");
        let layout = match system {
            System::Oscillator | System::Orbit => {
                LatentLayout::new(TermKind::Circle, 2, 1)
            }
            System::Qubit => LatentLayout::new(TermKind::Sphere, 3, 1),
        };
        TvaeModel::new(system, layout, 1.0, &mut rng).unwrap()
    }

    #[test]
    fn shapes_are_wired_through() {
        let model = fresh(System::Qubit, 1);
        let x = vec![0.1; 5];
        let (z, x_hat) = model.reconstruct(&x).unwrap();
        assert_eq!(z.len(), 4);
        assert_eq!(x_hat.len(), 5);
        assert!(z.iter().chain(&x_hat).all(|v| v.is_finite()));
    }

    #[test]
    fn wrong_input_dimension_is_an_error() {
        let model = fresh(System::Oscillator, 2);
        assert!(model.encode(&[0.0; 5]).is_err());
        assert!(model.decode(&[0.0; 4]).is_err());
    }

    #[test]
    fn centering_shifts_encode_and_decode_exactly() {
        let plain = fresh(System::Oscillator, 21);
        let mut centered = plain.clone();
        let c = [0.5, 0.5, -0.25];
        centered.set_input_center(&c).unwrap();

        let x = [0.9, 0.1, 0.3];
        let shifted: Vec<f64> = x.iter().zip(&c).map(|(v, m)| v - m).collect();
        assert_eq!(centered.encode(&x).unwrap(), plain.encode(&shifted).unwrap());

        let z = [0.2, -0.4, 0.1];
        let dec_plain = plain.decode(&z).unwrap();
        let dec_centered = centered.decode(&z).unwrap();
        for ((a, b), m) in dec_centered.iter().zip(&dec_plain).zip(&c) {
            assert_eq!(*a, b + m);
        }

        assert!(centered.set_input_center(&[0.0; 5]).is_err());
        assert!(centered.set_input_center(&[0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn parameter_gradients_match_central_differences() {
        let mut rng = Rng::stream(3, "model-grad");
        let cfg = LossConfig::new(1.0, 1.0, 100.0).unwrap();
        for round in 0..3 {
            let mut model = fresh(System::Oscillator, rng.below(1 << 20) as u64);
            if round > 0 {
                model.set_input_center(&[0.3, -0.2, 0.6]).unwrap();
            }
            let x: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let (_, enc_grads, dec_grads) = model.loss_and_grads(&cfg, &x).unwrap();

            let mut analytic = Mlp::grads_flat(&enc_grads);
            analytic.extend(Mlp::grads_flat(&dec_grads));

            let mut point = model.encoder().flatten();
            let enc_len = point.len();
            point.extend(model.decoder().flatten());
            let numeric = numdiff::gradient(
                |p| {
                    let mut probe = model.clone();
                    probe.encoder.load_flat(&p[..enc_len]).unwrap();
                    probe.decoder.load_flat(&p[enc_len..]).unwrap();
                    probe.loss_and_grads(&cfg, &x).unwrap().0.total
                },
                &point,
                1e-5,
            );
            let err = numdiff::max_rel_error(&analytic, &numeric, 1e-6);
            assert!(err < 1e-4, "rel error {err}");
        }
    }

    #[test]
    fn norm_mode_gradients_also_check_out() {
        let mut rng = Rng::stream(4, "model-grad-norm");
        let cfg = LossConfig::new(1.0, 1.0, 1.0)
            .unwrap()
            .with_mode(ReconMode::Norm);
        let model = fresh(System::Oscillator, 77);
        let x: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let (_, enc_grads, dec_grads) = model.loss_and_grads(&cfg, &x).unwrap();

        let mut analytic = Mlp::grads_flat(&enc_grads);
        analytic.extend(Mlp::grads_flat(&dec_grads));
        let mut point = model.encoder().flatten();
        let enc_len = point.len();
        point.extend(model.decoder().flatten());
        let numeric = numdiff::gradient(
            |p| {
                let mut probe = model.clone();
                probe.encoder.load_flat(&p[..enc_len]).unwrap();
                probe.decoder.load_flat(&p[enc_len..]).unwrap();
                probe.loss_and_grads(&cfg, &x).unwrap().0.total
            },
            &point,
            1e-5,
        );
        let err = numdiff::max_rel_error(&analytic, &numeric, 1e-6);
        assert!(err < 1e-4, "rel error {err}");
    }

    #[test]
    fn checkpoint_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut model = fresh(System::Orbit, 9);
        model
            .set_input_center(&[0.1 + 0.2, -1.0 / 3.0, 1e-17])
            .unwrap();
        model.save(&path).unwrap();
        let loaded = TvaeModel::load(&path).unwrap();
        assert_eq!(model, loaded);
    }

    #[test]
    fn checkpoint_rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = fresh(System::Oscillator, 10);
        model.save(&path).unwrap();
        let body = fs::read_to_string(&path)
            .unwrap()
            .replace(CHECKPOINT_MAGIC, "TVAE9");
        fs::write(&path, body).unwrap();
        let err = TvaeModel::load(&path).unwrap_err();
        assert!(matches!(err, VaeError::BadCheckpoint { .. }));
    }

    #[test]
    fn checkpoint_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        fs::write(&path, b"not json").unwrap();
        assert!(TvaeModel::load(&path).is_err());
        assert!(TvaeModel::load(&dir.path().join("missing.json")).is_err());
    }

    #[test]
    fn initialization_is_seed_deterministic() {
        let a = fresh(System::Qubit, 123);
        let b = fresh(System::Qubit, 123);
        assert_eq!(a, b);
        let c = fresh(System::Qubit, 124);
        assert_ne!(a, c);
    }

    #[test]
    fn noisy_encoding_is_deterministic_per_stream_and_differs_from_clean() {
        let model = fresh(System::Oscillator, 5);
        let x = [0.3, 0.7, -0.1];
        let clean = model.encode(&x).unwrap();
        let mut r1 = Rng::stream(6, "noise");
        let mut r2 = Rng::stream(6, "noise");
        let a = model.encode_with_noise(&x, &mut r1).unwrap();
        let b = model.encode_with_noise(&x, &mut r2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, clean);
        assert!(a.iter().all(|v| v.is_finite()));
    }
}
