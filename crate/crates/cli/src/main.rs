//! `adlrec`: batch driver for the ADL recognition pipeline.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use adl_core::experiment::Normalization;
use adl_core::features::DatasetVariant;
use adl_core::nn::Preset;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "adlrec", version, about = "Accelerometer ADL recognition: synth, featurize, train, evaluate, grid")]
pub(crate) struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub(crate) enum Command {
    /// Generate labelled synthetic capture files.
    Synth(SynthArgs),
    /// Turn a directory of capture files into a feature table.
    Featurize(FeaturizeArgs),
    /// Train one network on the training side of a split.
    Train(TrainArgs),
    /// Evaluate a model on the held-out side of a split.
    Eval(EvalArgs),
    /// Run the preset x variant x arm x budget grid and write reports.
    Grid(GridArgs),
    /// Compare analytic gradients with central finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub(crate) struct SynthArgs {
    /// key=value config file; flags override it.
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    /// Captures per activity [default: 200].
    #[arg(long)]
    pub(crate) per_class: Option<usize>,
    /// Output directory (config key `corpus_dir`).
    #[arg(long)]
    pub(crate) out_dir: Option<PathBuf>,
    /// Master seed [default: 0].
    #[arg(long)]
    pub(crate) seed: Option<u64>,
}

#[derive(Debug, Args)]
pub(crate) struct FeatureFlags {
    /// Low-pass smoothing factor in (0, 1] [default: 0.1].
    #[arg(long)]
    pub(crate) alpha: Option<f64>,
    /// Minimum spacing between retained peaks, ms [default: 250].
    #[arg(long)]
    pub(crate) min_separation_ms: Option<f64>,
    /// Peak threshold in standard deviations above the mean [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub(crate) prominence_floor: Option<f64>,
}

#[derive(Debug, Args)]
pub(crate) struct FeaturizeArgs {
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    /// Directory of `.txt` capture files (config key `corpus_dir`).
    #[arg(long)]
    pub(crate) in_dir: Option<PathBuf>,
    /// Output CSV (config key `features`).
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    #[command(flatten)]
    pub(crate) feature: FeatureFlags,
    /// Skip captures that fail validation instead of aborting.
    #[arg(long)]
    pub(crate) skip_invalid: bool,
}

#[derive(Debug, Args)]
pub(crate) struct SplitFlags {
    /// Seed for the split and the network [default: 0].
    #[arg(long)]
    pub(crate) seed: Option<u64>,
    /// Held-out fraction per class [default: 0.3].
    #[arg(long)]
    pub(crate) test_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub(crate) struct TrainArgs {
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    /// Feature table CSV.
    #[arg(long)]
    pub(crate) features: Option<PathBuf>,
    /// D1..D5 [default: D1].
    #[arg(long)]
    pub(crate) variant: Option<DatasetVariant>,
    /// mlp-bp, ff-bp or deep [default: deep].
    #[arg(long)]
    pub(crate) preset: Option<Preset>,
    /// raw or normalized (config key `norm`) [default: normalized].
    #[arg(long)]
    pub(crate) norm: Option<Normalization>,
    /// SGD updates [default: 40000].
    #[arg(long)]
    pub(crate) budget: Option<usize>,
    #[command(flatten)]
    pub(crate) split: SplitFlags,
    /// Override the preset's learning rate.
    #[arg(long)]
    pub(crate) learning_rate: Option<f64>,
    /// Override the preset's L2 lambda (deep preset only).
    #[arg(long)]
    l2: Option<f64>,
    /// Output model file (config key `model`).
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub(crate) struct EvalArgs {
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    /// Model file.
    #[arg(long)]
    pub(crate) model: Option<PathBuf>,
    /// Feature table CSV.
    #[arg(long)]
    pub(crate) features: Option<PathBuf>,
    #[command(flatten)]
    pub(crate) split: SplitFlags,
    /// Also write the confusion matrix here (config key `eval_csv`).
    #[arg(long)]
    pub(crate) out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub(crate) struct GridArgs {
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    /// Feature table CSV; omit to use an in-memory synthetic corpus.
    #[arg(long)]
    pub(crate) features: Option<PathBuf>,
    /// Synthetic captures per class when no feature table is given [default: 200].
    #[arg(long)]
    pub(crate) synth_per_class: Option<usize>,
    /// Report directory.
    #[arg(long)]
    pub(crate) out_dir: Option<PathBuf>,
    /// Master seed [default: 0].
    #[arg(long)]
    pub(crate) seed: Option<u64>,
    /// Comma-separated update budgets [default: 10000,20000,40000].
    #[arg(long)]
    pub(crate) budgets: Option<String>,
    /// Comma-separated presets [default: all].
    #[arg(long)]
    pub(crate) presets: Option<String>,
    /// Comma-separated variants [default: D1..D5].
    #[arg(long)]
    pub(crate) variants: Option<String>,
    /// Comma-separated arms [default: raw,normalized].
    #[arg(long)]
    pub(crate) normalizations: Option<String>,
    #[arg(long)]
    pub(crate) test_fraction: Option<f64>,
    /// Worker threads; 0 = all cores [default: 0].
    #[arg(long)]
    pub(crate) jobs: Option<usize>,
    #[command(flatten)]
    pub(crate) feature: FeatureFlags,
}

#[derive(Debug, Args)]
pub(crate) struct GradcheckArgs {
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    /// Preset to check; all three when omitted.
    #[arg(long)]
    pub(crate) preset: Option<Preset>,
    /// Random trials per preset [default: 100].
    #[arg(long)]
    pub(crate) trials: Option<usize>,
    #[arg(long)]
    pub(crate) seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
                    eprintln!("error: Usage: {first}");
                    ExitCode::from(error::EXIT_VALIDATION as u8)
                }
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code as u8)
        }
    }
}
