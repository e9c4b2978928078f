use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;
use tvae_core::{csv, ExperimentConfig, LatentLayout, TermKind, TrainingParams};
use tvae_train::TrainSchedule;

use crate::manifest::{record_stage, StageRecord};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset CSV to train on.
    #[arg(long)]
    pub input: PathBuf,
    /// Latent manifold penalty: circle, sphere, or lemniscate.
    #[arg(long)]
    pub term: TermKind,
    /// Topological latent coordinates (must match the term's arity).
    #[arg(long)]
    pub tpv: usize,
    /// General latent coordinates under the Gaussian prior.
    #[arg(long)]
    pub gpv: usize,
    /// Reconstruction weight.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Manifold penalty weight.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Gaussian prior weight.
    #[arg(long, default_value_t = 100.0)]
    pub gamma: f64,
    /// Optimizer iterations.
    #[arg(long, default_value_t = 50_000)]
    pub iters: usize,
    /// Seed for weight initialization and batch sampling.
    #[arg(long, env = "TVAE_SEED")]
    pub seed: u64,
    /// Output directory for checkpoint.json and loss.csv.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn train(args: TrainArgs) -> Result<i32> {
    let started = Instant::now();
    let data = super::load_cloud(&args.input)?;
    let system = super::system_of(&data, &args.input)?;

    let cfg = ExperimentConfig {
        system,
        n_samples: data.len(),
        seed: args.seed,
        alpha: args.alpha,
        beta: args.beta,
        gamma: args.gamma,
        layout: LatentLayout::new(args.term, args.tpv, args.gpv),
        training: TrainingParams {
            iterations: args.iters,
            ..TrainingParams::default()
        },
        betti_expected: None,
    };
    cfg.validate()?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let checkpoint = args.out.join("checkpoint.json");
    let mut schedule = TrainSchedule::from_config(&cfg);
    schedule.checkpoint_path = Some(checkpoint.clone());

    let outcome = tvae_train::train(&cfg, &data, &schedule)?;
    outcome.model.save(&checkpoint)?;

    let loss_path = args.out.join("loss.csv");
    csv::write_table(
        &loss_path,
        &["iteration", "total", "recon", "topo", "gpv"],
        outcome.history.iter().map(|r| {
            vec![
                r.iteration as f64,
                r.terms.total,
                r.terms.recon,
                r.terms.topo,
                r.terms.gpv,
            ]
        }),
    )?;

    record_stage(
        &args.out,
        "train",
        StageRecord {
            config: json!({
                "system": system.name(),
                "term": args.term.name(),
                "tpv": args.tpv,
                "gpv": args.gpv,
                "alpha": args.alpha,
                "beta": args.beta,
                "gamma": args.gamma,
                "iterations": args.iters,
                "batch_size": cfg.training.batch_size,
                "learning_rate": cfg.training.learning_rate,
            }),
            inputs: vec![args.input.display().to_string()],
            outputs: vec!["checkpoint.json".into(), "loss.csv".into()],
            seed: Some(args.seed),
            duration_seconds: started.elapsed().as_secs_f64(),
        },
    )?;

    if let Some(last) = outcome.history.last() {
        println!(
            "trained {} iterations in {:.1}s, final loss {:.6}",
            args.iters,
            started.elapsed().as_secs_f64(),
            last.terms.total
        );
    }
    Ok(0)
}
