use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::json;
use tvae_core::{csv, System};

use crate::manifest::{record_stage, StageRecord};

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// System to sample: oscillator, orbit, or qubit.
    #[arg(long)]
    pub system: System,
    /// Number of samples to draw.
    #[arg(long)]
    pub n: usize,
    /// RNG seed.
    #[arg(long, env = "TVAE_SEED")]
    pub seed: u64,
    /// Output directory for data.csv and data.labels.csv.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn generate(args: GenerateArgs) -> Result<i32> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let started = Instant::now();
    let dataset = tvae_physics::generate(args.system, args.n, args.seed)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let data_path = args.out.join("data.csv");
    let labels_path = args.out.join("data.labels.csv");
    csv::save_csv(&dataset.observations, &data_path)?;
    csv::save_csv(&dataset.labels, &labels_path)?;

    record_stage(
        &args.out,
        "generate",
        StageRecord {
            config: json!({ "system": args.system.name(), "n": args.n }),
            inputs: vec![],
            outputs: vec!["data.csv".into(), "data.labels.csv".into()],
            seed: Some(args.seed),
            duration_seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    println!(
        "wrote {} {}x{} samples to {}",
        args.system,
        args.n,
        dataset.observations.dim(),
        args.out.display()
    );
    Ok(0)
}
