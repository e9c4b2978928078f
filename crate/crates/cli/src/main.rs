//! `tvae`: sample toy physics systems, read off the topology of their
//! observation manifolds with persistent homology, train an autoencoder whose
//! latent prior matches that topology, and export plot-ready tables.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 resource cap
//! exceeded, 4 metric or numeric failure.

mod commands;
mod manifest;

use clap::{Parser, Subcommand};
use tvae_tda::TdaError;
use tvae_train::TrainError;

#[derive(Parser)]
#[command(
    name = "tvae",
    version,
    about = "Topology-matched autoencoders for simulated physics observations"
)]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a physics system into data.csv and data.labels.csv.
    Generate(commands::GenerateArgs),
    /// Infer Betti numbers of a dataset via persistent homology.
    Betti(commands::BettiArgs),
    /// Train the topology-constrained autoencoder on a dataset.
    Train(commands::TrainArgs),
    /// Measure a trained checkpoint against a dataset and its labels.
    Eval(commands::EvalArgs),
    /// Emit plot-ready tables from a completed run directory.
    Export(commands::ExportArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} threads: {e}");
            std::process::exit(2);
        }
    }

    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Betti(args) => commands::betti(args),
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Export(args) => commands::export(args),
    };

    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = exit_code(&err);
            if code == 3 {
                eprintln!(
                    "hint: reduce --landmarks, lower --max-radius, or use a smaller --max-dim"
                );
            }
            std::process::exit(code);
        }
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(tda) = cause.downcast_ref::<TdaError>() {
            if tda.is_resource_cap() {
                return 3;
            }
        }
        if let Some(train) = cause.downcast_ref::<TrainError>() {
            if matches!(
                train,
                TrainError::NanLoss { .. } | TrainError::NotSpherical(_)
            ) {
                return 4;
            }
        }
    }
    2
}
