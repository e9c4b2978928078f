use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::json;
use tvae_core::{csv, PointCloud, System};
use tvae_train::polar_transform;
use tvae_vae::TvaeModel;

use crate::manifest::{record_stage, StageRecord};

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Completed run directory (data.csv, data.labels.csv, checkpoint.json).
    #[arg(long)]
    pub run: PathBuf,
    /// Output directory for the plot tables.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn export(args: ExportArgs) -> Result<i32> {
    let started = Instant::now();
    let data_path = args.run.join("data.csv");
    let labels_path = args.run.join("data.labels.csv");
    let checkpoint_path = args.run.join("checkpoint.json");
    for path in [&data_path, &labels_path, &checkpoint_path] {
        if !path.exists() {
            bail!(
                "incomplete run directory {}: missing {}",
                args.run.display(),
                path.file_name().unwrap().to_string_lossy()
            );
        }
    }

    let data = super::load_cloud(&data_path)?;
    let labels = super::load_cloud(&labels_path)?;
    let system = super::system_of(&data, &data_path)?;
    let model = TvaeModel::load(&checkpoint_path)?;
    if system != model.system() {
        bail!(
            "checkpoint was trained on {}, but the run data is {}",
            model.system(),
            system
        );
    }
    if labels.len() != data.len() {
        bail!(
            "{} labels for {} samples",
            labels.len(),
            data.len()
        );
    }

    let mut latents = Vec::with_capacity(data.len());
    for x in data.points() {
        latents.push(model.encode(x)?);
    }

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let dim = model.layout().latent_dim();
    let written = match system {
        System::Oscillator => {
            write_against(&args.out.join("latent_vs_x1.csv"), "x1", &data, 0, &latents, dim)?;
            write_against(&args.out.join("latent_vs_v.csv"), "v", &data, 2, &latents, dim)?;
            write_scatter(&args.out.join("latent_scatter.csv"), "theta", &labels, &latents, dim)?;
            vec!["latent_vs_x1.csv", "latent_vs_v.csv", "latent_scatter.csv"]
        }
        System::Orbit => {
            write_against(&args.out.join("latent_vs_x.csv"), "x", &data, 0, &latents, dim)?;
            write_against(&args.out.join("latent_vs_y.csv"), "y", &data, 1, &latents, dim)?;
            write_scatter(&args.out.join("latent_scatter.csv"), "t", &labels, &latents, dim)?;
            vec!["latent_vs_x.csv", "latent_vs_y.csv", "latent_scatter.csv"]
        }
        System::Qubit => {
            let n_tpv = model.layout().n_tpv;
            let rows = labels
                .points()
                .zip(&latents)
                .map(|(label, z)| {
                    let (theta, phi) = polar_transform(&z[..n_tpv])?;
                    Ok(vec![label[0], label[1], theta, phi])
                })
                .collect::<Result<Vec<_>>>()?;
            csv::write_table(
                &args.out.join("azimuth_compare.csv"),
                &["theta0", "phi0", "theta1", "phi1"],
                rows.into_iter(),
            )?;
            vec!["azimuth_compare.csv"]
        }
    };

    record_stage(
        &args.out,
        "export",
        StageRecord {
            config: json!({ "system": system.name(), "run": args.run.display().to_string() }),
            inputs: vec![
                data_path.display().to_string(),
                labels_path.display().to_string(),
                checkpoint_path.display().to_string(),
            ],
            outputs: written.iter().map(|s| s.to_string()).collect(),
            seed: None,
            duration_seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    println!("exported {} to {}", written.join(", "), args.out.display());
    Ok(0)
}

/// Table of one observation coordinate against every latent coordinate.
fn write_against(
    path: &Path,
    name: &str,
    data: &PointCloud,
    column: usize,
    latents: &[Vec<f64>],
    dim: usize,
) -> Result<()> {
    let headers = table_headers(name, dim);
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    csv::write_table(
        path,
        &header_refs,
        data.points().zip(latents).map(|(x, z)| {
            let mut row = Vec::with_capacity(dim + 1);
            row.push(x[column]);
            row.extend_from_slice(z);
            row
        }),
    )?;
    Ok(())
}

/// Table of the hidden label against every latent coordinate.
fn write_scatter(
    path: &Path,
    label_name: &str,
    labels: &PointCloud,
    latents: &[Vec<f64>],
    dim: usize,
) -> Result<()> {
    let headers = table_headers(label_name, dim);
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    csv::write_table(
        path,
        &header_refs,
        labels.points().zip(latents).map(|(l, z)| {
            let mut row = Vec::with_capacity(dim + 1);
            row.push(l[0]);
            row.extend_from_slice(z);
            row
        }),
    )?;
    Ok(())
}

fn table_headers(first: &str, dim: usize) -> Vec<String> {
    let mut headers = vec![first.to_string()];
    headers.extend((0..dim).map(|j| format!("z{j}")));
    headers
}
