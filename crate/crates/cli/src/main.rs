mod commands;
mod fail;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand};

use fail::{CliError, CliResult};
use settings::{require, Settings};

/// Interpretable classification with B-cos networks and class-defining features.
#[derive(Parser)]
#[command(name = "comix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key=value settings file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write synthetic train/test datasets to --out.
    GenerateData,
    /// Train a B-cos network on --data; writes model.bin and loss.csv to --out.
    Train,
    /// Embed --data with --model and select class-defining features.
    BuildBank,
    /// Classify --input and print the prediction record.
    Classify,
    /// Classify --input and render its explanation panel into --out.
    Explain,
    /// Write the dominant-feature segmentation of --input to --out.
    Segment,
    /// Evaluate on the dataset --data; writes report.tsv and curve CSVs to --out.
    Eval,
}

#[derive(Args)]
struct Flags {
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    bank: Option<String>,
    #[arg(long, global = true)]
    cdf: Option<String>,
    /// Dataset directory (images.idx, labels.idx, classes.txt).
    #[arg(long, global = true)]
    data: Option<String>,
    /// Dataset whose mean image is the eval baseline (defaults to --data).
    #[arg(long, global = true)]
    reference: Option<String>,
    /// DIR#N for sample N of a dataset directory, or a PGM/PPM file.
    #[arg(long, global = true)]
    input: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long = "M", global = true)]
    m: Option<String>,
    #[arg(long = "K", global = true)]
    k: Option<String>,
    #[arg(long, global = true)]
    bins: Option<String>,
    #[arg(long, global = true)]
    steps: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    counterfactual: Option<String>,
    /// Comma-separated: accuracy, drop, curves, pq, confusion or all.
    #[arg(long, global = true)]
    metrics: Option<String>,
    #[arg(long, global = true)]
    epochs: Option<String>,
    /// One Euclidean neighbour search over all class-defining features.
    #[arg(long = "joint-l2", global = true)]
    joint_l2: bool,
}

impl Flags {
    fn apply(&self, s: &mut Settings) {
        let pairs = [
            ("model", &self.model),
            ("bank", &self.bank),
            ("cdf", &self.cdf),
            ("data", &self.data),
            ("reference", &self.reference),
            ("input", &self.input),
            ("out", &self.out),
            ("M", &self.m),
            ("K", &self.k),
            ("bins", &self.bins),
            ("steps", &self.steps),
            ("seed", &self.seed),
            ("counterfactual", &self.counterfactual),
            ("metrics", &self.metrics),
            ("epochs", &self.epochs),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v.clone());
            }
        }
        if self.joint_l2 {
            s.set("joint-l2", "true");
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(text) = std::env::var("COMIX_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| CliError::flag(format!("invalid COMIX_THREADS value '{text}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::new(fail::Kind::Runtime, e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let mut settings = match &cli.config {
        Some(path) => {
            require(path)?;
            Settings::from_config_text(&std::fs::read_to_string(path)?, path)?
        }
        None => Settings::default(),
    };
    cli.flags.apply(&mut settings);
    match cli.command {
        Command::GenerateData => commands::generate_data(&settings),
        Command::Train => commands::train(&settings),
        Command::BuildBank => commands::build_bank(&settings),
        Command::Classify => commands::classify(&settings),
        Command::Explain => commands::explain(&settings),
        Command::Segment => commands::segment(&settings),
        Command::Eval => commands::eval(&settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let err = CliError::flag(first.trim_start_matches("error: "));
            eprintln!("{err}");
            return ExitCode::from(err.kind.code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.kind.code() as u8)
        }
    }
}
