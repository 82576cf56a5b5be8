//! `sparse-har` command-line runner.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

/// A problem with what the user supplied (flags, config, files).
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

#[derive(Parser)]
#[command(
    name = "sparse-har",
    version,
    about = "Set-based activity recognition on sparse sensor streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run config, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Segment archive written by `ingest`.
    #[arg(long)]
    segments: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Trained model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Trained dense baseline file.
    #[arg(long)]
    baseline: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Read a CSV or synthesize streams, segment them, write an archive.
    Ingest(#[command(flatten)] Common),
    /// Train a model on segments.
    Train {
        #[command(flatten)]
        common: Common,
        /// Also train the interpolation-fed dense baseline.
        #[arg(long)]
        with_baseline: bool,
    },
    /// Score a model, or cross-validate the configured model spec.
    Eval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        models: ModelArgs,
        #[arg(long)]
        cross_validate: bool,
    },
    /// Sparsification sweep, optionally a window × interpolation grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        models: ModelArgs,
        #[arg(long)]
        grid: bool,
    },
    /// Time both inference pipelines on one batch.
    Latency {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        models: ModelArgs,
    },
    /// Export pooled embeddings.
    Embed {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        models: ModelArgs,
    },
    /// Histogram of contributing readings per activity.
    Density {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        models: ModelArgs,
    },
}

fn overrides(common: Common, models: Option<ModelArgs>) -> (Option<PathBuf>, Overrides) {
    let models = models.unwrap_or(ModelArgs {
        model: None,
        baseline: None,
    });
    (
        common.config,
        Overrides {
            out: common.out,
            seed: common.seed,
            segments: common.segments,
            model: models.model,
            baseline: models.baseline,
            ..Overrides::default()
        },
    )
}

fn run(cli: Cli) -> anyhow::Result<()> {
    type Handler = fn(&RunConfig) -> anyhow::Result<()>;
    let (config, mut o, handler): (_, _, Handler) = match cli.command {
        Command::Ingest(common) => {
            let (c, o) = overrides(common, None);
            (c, o, commands::ingest)
        }
        Command::Train {
            common,
            with_baseline,
        } => {
            let (c, mut o) = overrides(common, None);
            o.train_baseline = with_baseline;
            (c, o, commands::train)
        }
        Command::Eval {
            common,
            models,
            cross_validate,
        } => {
            let (c, mut o) = overrides(common, Some(models));
            o.cross_validate = cross_validate;
            (c, o, commands::eval)
        }
        Command::Sweep { common, models, grid } => {
            let (c, mut o) = overrides(common, Some(models));
            o.grid = grid;
            (c, o, commands::sweep)
        }
        Command::Latency { common, models } => {
            let (c, o) = overrides(common, Some(models));
            (c, o, commands::latency)
        }
        Command::Embed { common, models } => {
            let (c, o) = overrides(common, Some(models));
            (c, o, commands::embed)
        }
        Command::Density { common, models } => {
            let (c, o) = overrides(common, Some(models));
            (c, o, commands::density)
        }
    };
    if let Some(p) = &config {
        if !p.is_file() {
            return Err(InputError(format!("config file not found: {}", p.display())).into());
        }
    }
    let cfg = RunConfig::resolve(config.as_deref(), std::mem::take(&mut o))?;
    cfg.out_dir()?;
    cfg.check_paths()?;
    cfg.train.validate()?;
    handler(&cfg)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InputError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<sparse_har::Error>() {
            return if e.is_input_error() { 2 } else { 3 };
        }
        if cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
