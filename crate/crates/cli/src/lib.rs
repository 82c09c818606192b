//! `echogest` command-line front end: synthesize recordings, process them
//! into motion frames, build datasets, train and evaluate the classifier.

pub mod commands;
pub mod config;
pub mod error;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, CliResult, ExitKind};

pub const CONFIG_ENV: &str = "ECHOGEST_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "echogest", version, about = "Ultrasonic hand-gesture recognition pipeline")]
pub struct Cli {
    /// TOML run configuration; defaults apply when absent.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set dsp.clutter_factor=0.7`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic gesture recording to WAV.
    Synth {
        #[arg(long)]
        gesture: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn a WAV recording into motion frames and features.
    Process {
        #[arg(long)]
        input: PathBuf,
        /// Classify the recording with this model.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the labelled synthetic dataset.
    Dataset {
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the classifier tree.
    Train {
        /// Dataset manifest; the configured dataset is rendered when absent.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a model, or cross-validate when no model is given.
    Eval {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild report files from saved confusion counts.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the effective configuration.
    Config,
}

/// Executes one parsed invocation, printing a short summary to stdout.
pub fn run(cli: Cli) -> CliResult<()> {
    let mut overrides = cli.overrides.clone();
    if let Command::Synth { gesture, seed, .. } = &cli.command {
        if let Some(g) = gesture {
            let g: echogest_core::GestureKind =
                g.parse().map_err(|e: echogest_core::Error| CliError::Config(e.to_string()))?;
            overrides.push(format!("synth.gesture=\"{}\"", g.key()));
        }
        if let Some(s) = seed {
            overrides.push(format!("synth.seed={s}"));
        }
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;

    match &cli.command {
        Command::Synth { out, .. } => {
            let meta = commands::synth(&cfg, out)?;
            println!(
                "wrote {} ({} samples at {} Hz, gesture {}, seed {})",
                out.join(commands::WAV_FILE).display(),
                meta.samples,
                meta.sample_rate_hz,
                meta.gesture,
                meta.seed
            );
        }
        Command::Process { input, model, out } => {
            let s = commands::process(&cfg, input, model.as_deref(), out)?;
            if s.dropped_samples > 0 {
                eprintln!("warning: ignored {} trailing samples (partial block)", s.dropped_samples);
            }
            println!("{} motion frames written to {}", s.frames.len(), out.display());
            if let Some(g) = s.prediction {
                println!("predicted gesture: {}", g.label());
            }
        }
        Command::Dataset { out } => {
            let m = commands::dataset(&cfg, out)?;
            println!("{} examples written to {}", m.items.len(), out.join(commands::MANIFEST_FILE).display());
        }
        Command::Train { dataset, out } => {
            commands::train(&cfg, dataset.as_deref(), out)?;
            println!("model written to {}", out.join(commands::MODEL_FILE).display());
        }
        Command::Eval { dataset, model, out } => {
            let s = commands::eval(&cfg, dataset.as_deref(), model.as_deref(), out)?;
            if s.folds > 0 {
                println!("{}-fold repeated hold-out", s.folds);
            }
            print!("{}", fs::read_to_string(out.join("table.txt"))?);
        }
        Command::Report { input, out } => {
            commands::report(input, out)?;
            print!("{}", fs::read_to_string(out.join("table.txt"))?);
        }
        Command::Config => print!("{}", cfg.to_toml()?),
    }
    Ok(())
}
