use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::json;
use tvae_core::csv;
use tvae_train::evaluate;
use tvae_vae::TvaeModel;

use crate::manifest::{record_stage, StageRecord};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset CSV to evaluate on.
    #[arg(long)]
    pub input: PathBuf,
    /// Ground-truth label CSV; without it the winding checks are skipped.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Trained checkpoint to load.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Output directory for report.json and latents.csv.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn eval(args: EvalArgs) -> Result<i32> {
    let started = Instant::now();
    let data = super::load_cloud(&args.input)?;
    let data_system = super::system_of(&data, &args.input)?;
    let model = TvaeModel::load(&args.checkpoint)?;
    if data_system != model.system() {
        bail!(
            "checkpoint was trained on {}, but {} holds {} data",
            model.system(),
            args.input.display(),
            data_system
        );
    }
    let labels = match &args.labels {
        Some(path) => Some(super::load_cloud(path)?),
        None => None,
    };

    let report = evaluate(&model, &data, labels.as_ref())?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let report_path = args.out.join("report.json");
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)
        .with_context(|| format!("writing {}", report_path.display()))?;

    let dim = model.layout().latent_dim();
    let headers: Vec<String> = (0..dim).map(|j| format!("z{j}")).collect();
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    csv::write_table(
        &args.out.join("latents.csv"),
        &header_refs,
        report.latents.iter().cloned(),
    )?;

    record_stage(
        &args.out,
        "eval",
        StageRecord {
            config: json!({
                "system": model.system().name(),
                "checkpoint": args.checkpoint.display().to_string(),
                "labels_used": report.labels_used,
            }),
            inputs: vec![args.input.display().to_string()],
            outputs: vec!["report.json".into(), "latents.csv".into()],
            seed: None,
            duration_seconds: started.elapsed().as_secs_f64(),
        },
    )?;

    let failures = report.failures(model.system());
    if failures.is_empty() {
        println!("all thresholds passed");
        Ok(0)
    } else {
        for f in &failures {
            eprintln!("threshold failed: {f}");
        }
        Ok(4)
    }
}
