//! `phi-sentinel`: scan tabular files for PHI columns, train and evaluate
//! the metadata model, explain its verdicts and generate synthetic corpora.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit codes follow sysexits: usage 64, missing input 66, internal 70.
pub const EXIT_PHI_FOUND: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_NO_INPUT: u8 = 66;
pub const EXIT_INTERNAL: u8 = 70;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn missing_input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_NO_INPUT,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<phi_sentinel::Error> for Failure {
    fn from(e: phi_sentinel::Error) -> Self {
        let code = match &e {
            phi_sentinel::Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => EXIT_NO_INPUT,
            _ => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "phi-sentinel", version, about = "Column-level PHI detection for tabular health data")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON file whose fields mirror the flags; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads (falls back to PHI_SENTINEL_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Non-null values sampled per column [default: 1000].
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Seed for sampling, folds and generation [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pattern library JSON replacing the builtin one.
    #[arg(long, global = true, value_name = "PATH")]
    pub library: Option<PathBuf>,
    /// Field delimiter of input files [default: ,].
    #[arg(long, global = true)]
    pub delimiter: Option<char>,
    /// Input files have no header row.
    #[arg(long, global = true)]
    pub no_header: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every column of a file or directory and write a JSON report.
    Scan(ScanArgs),
    /// Train a model on labeled datasets.
    Train(TrainArgs),
    /// Cross-validate regex, model and ensemble on labeled datasets.
    Evaluate(EvaluateArgs),
    /// Shapley attributions per column plus a feature-importance table.
    Explain(ExplainArgs),
    /// Generate a labeled synthetic corpus.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Dataset file or directory of dataset files.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Trained model JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Decision threshold on the final probability [default: 0.5].
    #[arg(long, conflicts_with = "paranoid")]
    pub threshold: Option<f64>,
    /// Lower the threshold to 0.2, trading false positives for recall.
    #[arg(long)]
    pub paranoid: bool,
    /// Exit with status 2 when any column is flagged.
    #[arg(long)]
    pub fail_on_phi: bool,
    /// Attach this many top attributions to each verdict.
    #[arg(long, default_value_t = 0)]
    pub top: usize,
    /// Background rows for attributions (file or directory); defaults to the input.
    #[arg(long)]
    pub background: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled dataset file or corpus directory.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Label sidecar for a single input file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Model path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-round training loss as CSV; printed to stdout when omitted.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Labeled dataset file or corpus directory.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Label sidecar for a single input file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Number of cross-validation folds [default: 5].
    #[arg(long)]
    pub folds: Option<usize>,
    /// Decision threshold for the threshold metrics [default: 0.5].
    #[arg(long, conflicts_with = "paranoid")]
    pub threshold: Option<f64>,
    /// Use the 0.2 threshold.
    #[arg(long)]
    pub paranoid: bool,
    /// JSON results path; printed after the table when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    /// Dataset file or directory to explain.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Trained model JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Explain only this column.
    #[arg(long)]
    pub column: Option<String>,
    /// Background rows (file or directory); defaults to the input.
    #[arg(long)]
    pub background: Option<PathBuf>,
    /// Attribution JSON path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Importance CSV path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Rows in the importance table.
    #[arg(long, default_value_t = 20)]
    pub top_k: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Corpus directory to create.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub datasets: usize,
    #[arg(long, default_value_t = 889)]
    pub columns: usize,
    #[arg(long, default_value_t = 1000)]
    pub rows: usize,
    #[arg(long, default_value_t = 0.075)]
    pub phi_fraction: f64,
    /// Use every format in every dataset.
    #[arg(long)]
    pub no_held_out: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
