use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;
use tvae_tda::{analyze, VrConfig};

use crate::manifest::{record_stage, StageRecord};

#[derive(Debug, Args)]
pub struct BettiArgs {
    /// Dataset CSV to analyze.
    #[arg(long)]
    pub input: PathBuf,
    /// Highest homology dimension to report (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub max_dim: u8,
    /// Landmark count for the farthest-point subsample
    /// (default 400, or 150 when --max-dim is 2).
    #[arg(long)]
    pub landmarks: Option<usize>,
    /// Minimum bar lifetime counted as a feature, as a fraction of the
    /// landmark-set diameter.
    #[arg(long)]
    pub lifetime_ratio: Option<f64>,
    /// Filtration scale cap (default: half the landmark-set diameter).
    #[arg(long)]
    pub max_radius: Option<f64>,
    /// Where to write the barcode JSON.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn betti(args: BettiArgs) -> Result<i32> {
    let started = Instant::now();
    let cloud = super::load_cloud(&args.input)?;

    let mut cfg = VrConfig::for_max_dim(args.max_dim);
    if let Some(landmarks) = args.landmarks {
        cfg.landmarks = landmarks;
    }
    if let Some(ratio) = args.lifetime_ratio {
        cfg.lifetime_ratio = ratio;
    }
    if args.max_radius.is_some() {
        cfg.max_radius = args.max_radius;
    }

    let analysis = analyze(&cloud, &cfg)?;
    let body = serde_json::to_string_pretty(&analysis.report())?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(&args.out, body).with_context(|| format!("writing {}", args.out.display()))?;

    let dir = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    record_stage(
        &dir,
        "betti",
        StageRecord {
            config: json!({
                "max_dim": args.max_dim,
                "landmarks": cfg.landmarks,
                "lifetime_ratio": cfg.lifetime_ratio,
                "max_radius": analysis.max_radius,
            }),
            inputs: vec![args.input.display().to_string()],
            outputs: vec![args.out.display().to_string()],
            seed: None,
            duration_seconds: started.elapsed().as_secs_f64(),
        },
    )?;

    eprintln!(
        "{} landmarks, {} simplices, diameter {:.4}, {:.1}s",
        analysis.landmarks_used,
        analysis.simplex_count,
        analysis.diameter,
        started.elapsed().as_secs_f64()
    );
    println!("{}", analysis.betti);
    Ok(0)
}
