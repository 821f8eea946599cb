//! `gpolar`: construct, analyze, encode, decode and simulate generalized
//! polar codes over BMS channels from the command line.
//!
//! Every subcommand is a pure function of its flags plus the seed; outputs
//! go to `-o` or stdout, progress summaries and errors go to stderr. Errors
//! are a single JSON line; exit code 2 flags invalid input, 3 a numeric
//! failure.

mod inputs;
mod run;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "gpolar", version, about = "Generalized polar codes with erasure decoding")]
struct Cli {
    /// Worker threads for simulation and construction (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Channel selection: `--bec`, `--bsc`, or a full document.
#[derive(Args, Debug)]
#[group(multiple = false)]
struct ChannelArgs {
    /// Binary erasure channel with this erasure probability.
    #[arg(long, value_name = "EPS")]
    bec: Option<f64>,

    /// Binary symmetric channel with this crossover probability.
    #[arg(long, value_name = "EPS")]
    bsc: Option<f64>,

    /// Channel document as inline JSON or `@file`.
    #[arg(long, value_name = "JSON|@FILE")]
    channel: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConstructionKind {
    Polar,
    Rm,
    ZeroUe,
}

#[derive(Subcommand)]
enum Command {
    /// Per-index synthetic channel table and scheme summary.
    Analyze {
        #[command(flatten)]
        channel: ChannelArgs,

        /// Polarization steps n (blocklength 2^n).
        #[arg(short = 'n', long = "steps", value_name = "N")]
        n: u32,

        /// Uniform decision threshold for the per-index operating points.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,

        /// Target rate; adds the predicted erasure scaling exponent when it
        /// lies below the zero-error capacity.
        #[arg(long)]
        rate: Option<f64>,

        /// Component cap during synthesis.
        #[arg(long, default_value_t = gpolar::DEFAULT_L_MAX)]
        l_max: usize,

        /// Merge tolerance applied when canonicalizing the input channel.
        #[arg(long, default_value_t = gpolar::DEFAULT_MERGE_TOL)]
        merge_tol: f64,

        /// Largest n the full 2^n enumeration will accept.
        #[arg(long, default_value_t = 14)]
        max_n: u32,

        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,

        /// Output path (stdout when absent).
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },

    /// Build a code and write its artifact document.
    Construct {
        /// Construction rule.
        #[arg(long, value_enum)]
        kind: ConstructionKind,

        #[command(flatten)]
        channel: ChannelArgs,

        #[arg(short = 'n', long = "steps", value_name = "N")]
        n: u32,

        /// Code dimension r (information bits).
        #[arg(short = 'r', long, conflicts_with = "rate")]
        dimension: Option<usize>,

        /// Code rate; the dimension becomes ceil(rate * 2^n).
        #[arg(long)]
        rate: Option<f64>,

        #[arg(long, default_value_t = gpolar::DEFAULT_L_MAX)]
        l_max: usize,

        #[arg(long, default_value_t = gpolar::DEFAULT_MERGE_TOL)]
        merge_tol: f64,

        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },

    /// Encode a message with a code artifact.
    Encode {
        /// Code artifact document (`@file` also accepted).
        #[arg(long, value_name = "JSON|@FILE")]
        code: String,

        /// Message bits as a 0/1 string or `@file` with a JSON bit array.
        #[arg(long, value_name = "BITS|@FILE")]
        message: String,

        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },

    /// Decode likelihoods or channel observations.
    Decode {
        #[arg(long, value_name = "JSON|@FILE")]
        code: String,

        /// JSON array of `[l0, l1]` likelihood pairs (inline or `@file`).
        #[arg(long, value_name = "JSON|@FILE", conflicts_with = "observations")]
        likelihoods: Option<String>,

        /// JSON array of `[component, bit]` observations (inline or
        /// `@file`); requires a channel here or in the artifact.
        #[arg(long, value_name = "JSON|@FILE")]
        observations: Option<String>,

        #[command(flatten)]
        channel: ChannelArgs,

        /// `zero`, a scalar in [0, 1/2], or `@file` with per-bit values.
        #[arg(long, default_value = "zero", value_name = "SPEC")]
        thresholds: String,

        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },

    /// Monte Carlo estimate of erasure and undetected-error probabilities.
    Simulate {
        #[arg(long, value_name = "JSON|@FILE")]
        code: String,

        #[command(flatten)]
        channel: ChannelArgs,

        #[arg(long, default_value = "zero", value_name = "SPEC")]
        thresholds: String,

        #[arg(long, default_value_t = 10_000)]
        trials: u64,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },

    /// Measure the trade-off curve over a grid of uniform thresholds.
    Sweep {
        #[arg(long, value_name = "JSON|@FILE")]
        code: String,

        #[command(flatten)]
        channel: ChannelArgs,

        /// `start:step:end` or a comma-separated list of thresholds.
        #[arg(long, value_name = "GRID")]
        grid: String,

        #[arg(long, default_value_t = 10_000)]
        trials: u64,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,

        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
}

/// Failure modes with their process exit codes.
#[derive(Debug)]
enum CliError {
    /// Bad flags, malformed documents, violated preconditions: exit 2.
    Validation(String),
    /// Numeric failures at run time: exit 3.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<gpolar::Error> for CliError {
    fn from(e: gpolar::Error) -> Self {
        match e {
            gpolar::Error::Numeric(m) => CliError::Runtime(m),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        // ignore the error if a pool already exists (tests, repeat init)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build_global();
    }
    if let Err(e) = run::dispatch(cli.command) {
        eprintln!("{}", serde_json::json!({ "error": e.message() }));
        std::process::exit(e.exit_code());
    }
}
