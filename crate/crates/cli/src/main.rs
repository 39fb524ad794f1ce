//! `grainforge` command-line driver.
//!
//! Every file a command writes is printed to stdout, one path per line;
//! progress and diagnostics go to stderr. Exit codes: 0 success, 1 runtime
//! failure, 2 usage or validation error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{ExplainOptions, RunOptions};

#[derive(Parser)]
#[command(name = "grainforge", version, about = "Crop-image CNN training and explanation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan class-named subdirectories of DIR and write a manifest CSV.
    Ingest {
        dir: PathBuf,
        #[arg(long, short, default_value = "manifest.csv")]
        output: PathBuf,
    },
    /// Train a network; writes weights.gfw, history.csv and run.json.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "run")]
        out_dir: PathBuf,
        #[command(flatten)]
        run: RunOptions,
    },
    /// Score a split; writes metrics.csv, confusion.csv and roc_points.csv.
    Evaluate {
        #[arg(long)]
        weights: PathBuf,
        /// Usually the run.json written by `train`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        split: String,
        /// Defaults to the directory holding the weights.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        run: RunOptions,
    },
    /// Explain one prediction; writes `<image>.<method>.ppm` and `.csv`.
    Explain {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, value_enum, default_value = "lime")]
        method: Method,
        /// Class to explain; defaults to the predicted class.
        #[arg(long)]
        class: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to the image's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        run: RunOptions,
        #[command(flatten)]
        explain: ExplainOptions,
    },
    /// Summarise history and evaluation files of a run directory.
    Report {
        run_dir: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Lime,
    Shap,
}

impl Method {
    fn tag(self) -> &'static str {
        match self {
            Method::Lime => "lime",
            Method::Shap => "shap",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<grainforge::Error> for CliError {
    fn from(e: grainforge::Error) -> Self {
        match e {
            grainforge::Error::Parameter(m) => CliError::Usage(m),
            other => CliError::Runtime(other.into()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest { dir, output } => commands::ingest(&dir, &output),
        Command::Train { config, out_dir, run } => commands::train(run, config.as_deref(), &out_dir),
        Command::Evaluate { weights, config, split, out_dir, run } => {
            commands::evaluate(&weights, run, config.as_deref(), &split, out_dir.as_deref())
        }
        Command::Explain { weights, image, method, class, config, out_dir, run, explain } => {
            commands::explain(commands::ExplainRequest {
                weights: &weights,
                image: &image,
                method,
                class,
                config: config.as_deref(),
                out_dir: out_dir.as_deref(),
                run,
                explain,
            })
        }
        Command::Report { run_dir, output } => commands::report(&run_dir, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
