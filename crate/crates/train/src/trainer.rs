//! Minibatch Adam loop. Deterministic: the model initialization and the
//! batch draws come from two fixed named streams of the experiment seed, so
//! a seed pins the entire trajectory. The model is centered on the mean of
//! the training data before the first step.

use std::path::PathBuf;

use serde::Serialize;
use tvae_core::{ExperimentConfig, PointCloud, Rng};
use tvae_nn::{AdamState, Gradients};
use tvae_vae::{LossConfig, LossTerms, TvaeModel};

use crate::TrainError;

#[derive(Debug, Clone)]
pub struct TrainSchedule {
    pub iterations: usize,
    pub batch_size: usize,
    /// Record a loss row (and write a checkpoint, if a path is set) every
    /// this many iterations.
    pub eval_every: usize,
    pub checkpoint_path: Option<PathBuf>,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            iterations: 50_000,
            batch_size: 100,
            eval_every: 1_000,
            checkpoint_path: None,
        }
    }
}

impl TrainSchedule {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        TrainSchedule {
            iterations: cfg.training.iterations,
            batch_size: cfg.training.batch_size,
            ..TrainSchedule::default()
        }
    }
}

/// Batch-mean loss at one recorded iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossRecord {
    pub iteration: usize,
    pub terms: LossTerms,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub model: TvaeModel,
    pub history: Vec<LossRecord>,
}

pub fn train(
    cfg: &ExperimentConfig,
    data: &PointCloud,
    schedule: &TrainSchedule,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    if data.dim() != cfg.system.observation_dim() {
        return Err(TrainError::DataMismatch(format!(
            "data dimension {} but {} observations have {}",
            data.dim(),
            cfg.system,
            cfg.system.observation_dim()
        )));
    }
    if schedule.batch_size == 0 || schedule.batch_size > data.len() {
        return Err(TrainError::BadSchedule(format!(
            "batch size {} must be in 1..={}",
            schedule.batch_size,
            data.len()
        )));
    }
    if schedule.eval_every == 0 {
        return Err(TrainError::BadSchedule("eval_every must be positive".into()));
    }

    let loss_cfg = LossConfig::new(cfg.alpha, cfg.beta, cfg.gamma)?;
    let mut init_rng = Rng::stream(cfg.seed, "init");
    let mut model = TvaeModel::new(
        cfg.system,
        cfg.layout,
        cfg.training.weight_init_scale,
        &mut init_rng,
    )?;
    model.set_input_center(&data_mean(data))?;
    let mut batch_rng = Rng::stream(cfg.seed, "batch");
    let mut adam_enc = AdamState::new(model.encoder(), cfg.training.learning_rate);
    let mut adam_dec = AdamState::new(model.decoder(), cfg.training.learning_rate);

    let mut history = Vec::new();
    let mut last_good: Option<PathBuf> = None;
    let scale = 1.0 / schedule.batch_size as f64;

    for it in 0..schedule.iterations {
        let batch = batch_rng.sample_indices(data.len(), schedule.batch_size);
        let mut terms = LossTerms::zero();
        let mut enc_grads = Gradients::zeros_like(model.encoder());
        let mut dec_grads = Gradients::zeros_like(model.decoder());
        for &i in &batch {
            let (t, eg, dg) = model.loss_and_grads(&loss_cfg, data.point(i))?;
            terms.accumulate(&t);
            enc_grads.accumulate(&eg);
            dec_grads.accumulate(&dg);
        }
        terms.scale(scale);
        enc_grads.scale(scale);
        dec_grads.scale(scale);

        if !(terms.is_finite() && enc_grads.is_finite() && dec_grads.is_finite()) {
            return Err(TrainError::NanLoss {
                iteration: it,
                last_good,
            });
        }

        let (enc, dec) = model.nets_mut();
        adam_enc.step(enc, &enc_grads)?;
        adam_dec.step(dec, &dec_grads)?;

        if (it + 1) % schedule.eval_every == 0 || it + 1 == schedule.iterations {
            history.push(LossRecord {
                iteration: it + 1,
                terms,
            });
            if let Some(path) = &schedule.checkpoint_path {
                model.save(path)?;
                last_good = Some(path.clone());
            }
        }
    }

    Ok(TrainOutcome { model, history })
}

fn data_mean(data: &PointCloud) -> Vec<f64> {
    let mut mean = vec![0.0; data.dim()];
    for p in data.points() {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    let n = data.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use tvae_core::System;
    use tvae_physics::generate;

    fn short_schedule(iterations: usize, batch_size: usize) -> TrainSchedule {
        TrainSchedule {
            iterations,
            batch_size,
            eval_every: 10,
            checkpoint_path: None,
        }
    }

    fn oscillator_cfg(seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::for_system(System::Oscillator);
        cfg.seed = seed;
        cfg
    }

    #[test]
    fn same_seed_reproduces_history_and_model() {
        let data = generate(System::Oscillator, 120, 5).unwrap().observations;
        let cfg = oscillator_cfg(9);
        let schedule = short_schedule(40, 20);
        let a = train(&cfg, &data, &schedule).unwrap();
        let b = train(&cfg, &data, &schedule).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.model, b.model);

        let mut other = cfg;
        other.seed = 10;
        let c = train(&other, &data, &schedule).unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn history_rows_land_on_the_schedule() {
        let data = generate(System::Oscillator, 120, 5).unwrap().observations;
        let cfg = oscillator_cfg(9);
        let mut schedule = short_schedule(35, 20);
        schedule.eval_every = 10;
        let out = train(&cfg, &data, &schedule).unwrap();
        let iterations: Vec<usize> = out.history.iter().map(|r| r.iteration).collect();
        assert_eq!(iterations, vec![10, 20, 30, 35]);
    }

    #[test]
    fn model_is_centered_on_the_data_mean() {
        let data = generate(System::Oscillator, 150, 8).unwrap().observations;
        let out = train(&oscillator_cfg(2), &data, &short_schedule(5, 30)).unwrap();
        let center = out.model.input_center();
        let mean = data_mean(&data);
        assert_eq!(center, mean.as_slice());
        assert!((center[0] - 0.5).abs() < 0.05);
        assert!((center[1] - 0.5).abs() < 0.05);
    }

    #[test]
    fn plain_reconstruction_loss_trends_down() {
        let data = generate(System::Oscillator, 200, 11).unwrap().observations;
        let mut cfg = oscillator_cfg(3);
        cfg.beta = 0.0;
        cfg.gamma = 0.0;
        cfg.training.learning_rate = 1e-3;
        let schedule = TrainSchedule {
            iterations: 100,
            batch_size: 50,
            eval_every: 1,
            checkpoint_path: None,
        };
        let out = train(&cfg, &data, &schedule).unwrap();
        assert_eq!(out.history.len(), 100);
        let head: f64 = out.history[..20].iter().map(|r| r.terms.total).sum::<f64>() / 20.0;
        let tail: f64 = out.history[80..].iter().map(|r| r.terms.total).sum::<f64>() / 20.0;
        assert!(
            tail < head,
            "mean loss rose from {head} to {tail} over 100 iterations"
        );
    }

    #[test]
    fn divergence_aborts_with_iteration_and_last_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let ckpt = dir.path().join("last_good.json");
        let data = generate(System::Oscillator, 60, 2).unwrap().observations;
        let mut cfg = oscillator_cfg(4);
        cfg.training.learning_rate = 1e300;
        let schedule = TrainSchedule {
            iterations: 10,
            batch_size: 10,
            eval_every: 1,
            checkpoint_path: Some(ckpt.clone()),
        };
        let err = train(&cfg, &data, &schedule).unwrap_err();
        match err {
            TrainError::NanLoss {
                iteration,
                last_good,
            } => {
                assert!(iteration >= 1, "blew up at iteration {iteration}");
                let path = last_good.expect("a checkpoint was written before the blowup");
                TvaeModel::load(&path).unwrap();
            }
            other => panic!("expected NanLoss, got {other}"),
        }
    }

    #[test]
    fn schedule_and_data_validation() {
        let data = generate(System::Oscillator, 30, 2).unwrap().observations;
        let cfg = oscillator_cfg(1);
        assert!(matches!(
            train(&cfg, &data, &short_schedule(5, 31)),
            Err(TrainError::BadSchedule(_))
        ));
        let mut schedule = short_schedule(5, 10);
        schedule.eval_every = 0;
        assert!(matches!(
            train(&cfg, &data, &schedule),
            Err(TrainError::BadSchedule(_))
        ));
        let qubit = generate(System::Qubit, 30, 2).unwrap().observations;
        assert!(matches!(
            train(&cfg, &qubit, &short_schedule(5, 10)),
            Err(TrainError::DataMismatch(_))
        ));
    }
}
