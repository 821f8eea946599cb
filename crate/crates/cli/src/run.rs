//! Subcommand execution.

use std::fmt::Write as _;

use gpolar::{
    construct_polar, construct_rm, construct_zero_ue, observation_pair, per_index_table,
    scaling_exponent, sce_decode, sweep_thresholds, CodeArtifact, Construction, TradeoffCurve,
};
use serde_json::json;

use crate::inputs;
use crate::{ChannelArgs, CliError, Command, ConstructionKind, OutputFormat};

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze { channel, n, threshold, rate, l_max, merge_tol, max_n, format, output } => {
            analyze(&channel, n, threshold, rate, l_max, merge_tol, max_n, format, output.as_deref())
        }
        Command::Construct { kind, channel, n, dimension, rate, l_max, merge_tol, output } => {
            construct(kind, &channel, n, dimension, rate, l_max, merge_tol, output.as_deref())
        }
        Command::Encode { code, message, output } => encode(&code, &message, output.as_deref()),
        Command::Decode { code, likelihoods, observations, channel, thresholds, output } => decode(
            &code,
            likelihoods.as_deref(),
            observations.as_deref(),
            &channel,
            &thresholds,
            output.as_deref(),
        ),
        Command::Simulate { code, channel, thresholds, trials, seed, output } => {
            simulate(&code, &channel, &thresholds, trials, seed, output.as_deref())
        }
        Command::Sweep { code, channel, grid, trials, seed, format, output } => {
            sweep(&code, &channel, &grid, trials, seed, format, output.as_deref())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    channel: &ChannelArgs,
    n: u32,
    threshold: f64,
    rate: Option<f64>,
    l_max: usize,
    merge_tol: f64,
    max_n: u32,
    format: OutputFormat,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    if n > max_n {
        return Err(CliError::Validation(format!(
            "n = {n} exceeds the enumeration cap {max_n} (raise --max-n to override)"
        )));
    }
    if !(0.0..=0.5).contains(&threshold) {
        return Err(CliError::Validation(format!("threshold {threshold} outside [0, 1/2]")));
    }
    let doc = channel.required()?;
    let w = doc.to_mixture()?.canonicalize(merge_tol);
    let rows = per_index_table(&w, n, threshold, l_max);
    let params = w.params();
    // the exponent only exists below the zero-error capacity; above it the
    // summary reports null
    let exponent = match rate {
        Some(r) if !(0.0..=1.0).contains(&r) => {
            return Err(CliError::Validation(format!("rate {r} outside [0, 1]")));
        }
        Some(r) if r > 0.0 && r < params.zero_error_capacity => {
            Some(scaling_exponent(r, params.zero_error_capacity, n)?)
        }
        _ => None,
    };
    let text = match format {
        OutputFormat::Json => {
            let report = json!({
                "channel": doc,
                "n": n,
                "threshold": threshold,
                "summary": {
                    "capacity": params.capacity,
                    "bhattacharyya": params.bhattacharyya,
                    "zero_error_capacity": params.zero_error_capacity,
                    "best_imperfect": params.best_imperfect,
                    "rate": rate,
                    "scaling_exponent": exponent,
                },
                "rows": rows,
            });
            serde_json::to_string_pretty(&report).expect("report serializes")
        }
        OutputFormat::Csv => {
            let mut out = String::from(
                "index,signs,zero_error_capacity,best_imperfect,bhattacharyya,capacity,p_er,p_ue\n",
            );
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.index,
                    r.signs,
                    r.zero_error_capacity,
                    r.best_imperfect,
                    r.bhattacharyya,
                    r.capacity,
                    r.p_er,
                    r.p_ue
                )
                .expect("writing to a string cannot fail");
            }
            out
        }
    };
    inputs::write_output(output, &text)
}

#[allow(clippy::too_many_arguments)]
fn construct(
    kind: ConstructionKind,
    channel: &ChannelArgs,
    n: u32,
    dimension: Option<usize>,
    rate: Option<f64>,
    l_max: usize,
    merge_tol: f64,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let len = 1usize << n;
    let r = match (dimension, rate) {
        (Some(r), None) => Some(r),
        (None, Some(rate)) => {
            if !(0.0..=1.0).contains(&rate) {
                return Err(CliError::Validation(format!("rate {rate} outside [0, 1]")));
            }
            Some(((rate * len as f64).ceil() as usize).min(len))
        }
        (None, None) => None,
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let (code, construction, doc) = match kind {
        ConstructionKind::Rm => {
            let r = r.ok_or_else(|| {
                CliError::Validation("rm construction needs --dimension or --rate".into())
            })?;
            (construct_rm(n, r)?, Construction::Rm, channel.doc()?)
        }
        ConstructionKind::Polar => {
            let doc = channel.required()?;
            let w = doc.to_mixture()?.canonicalize(merge_tol);
            let r = r.ok_or_else(|| {
                CliError::Validation("polar construction needs --dimension or --rate".into())
            })?;
            (construct_polar(&w, n, r, l_max)?, Construction::Polar, Some(doc))
        }
        ConstructionKind::ZeroUe => {
            let doc = channel.required()?;
            let w = doc.to_mixture()?.canonicalize(merge_tol);
            let rate = rate.ok_or_else(|| {
                CliError::Validation("zero-ue construction takes --rate".into())
            })?;
            (construct_zero_ue(&w, n, rate, l_max)?, Construction::ZeroUe, Some(doc))
        }
    };
    let artifact = CodeArtifact::from_code(&code, construction, doc);
    let text = serde_json::to_string_pretty(&artifact).expect("artifact serializes");
    inputs::write_output(output, &text)
}

fn encode(code: &str, message: &str, output: Option<&std::path::Path>) -> Result<(), CliError> {
    let (_, code) = inputs::code_artifact(code)?;
    let message = inputs::message_bits(message)?;
    let codeword = code.encode(&message)?;
    let text = serde_json::to_string(&codeword).expect("bit vector serializes");
    inputs::write_output(output, &text)
}

fn decode(
    code: &str,
    likelihoods: Option<&str>,
    observations: Option<&str>,
    channel: &ChannelArgs,
    thresholds: &str,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (artifact, code) = inputs::code_artifact(code)?;
    let thresholds = inputs::thresholds(thresholds, code.dimension())?;
    let pairs = match (likelihoods, observations) {
        (Some(spec), None) => inputs::likelihood_pairs(spec)?,
        (None, Some(spec)) => {
            let w = inputs::channel_or_artifact(channel, &artifact)?
                .canonicalize(gpolar::DEFAULT_MERGE_TOL);
            let obs = inputs::observations(spec)?;
            obs.into_iter()
                .map(|o| observation_pair(&w, o))
                .collect::<gpolar::Result<Vec<_>>>()?
        }
        _ => {
            return Err(CliError::Validation(
                "decode needs exactly one of --likelihoods or --observations".into(),
            ))
        }
    };
    let result = sce_decode(&code, &pairs, &thresholds)?;
    let text = serde_json::to_string(&result).expect("decode result serializes");
    inputs::write_output(output, &text)
}

fn simulate(
    code: &str,
    channel: &ChannelArgs,
    thresholds: &str,
    trials: u64,
    seed: u64,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (artifact, code) = inputs::code_artifact(code)?;
    let w = inputs::channel_or_artifact(channel, &artifact)?;
    let thresholds = inputs::thresholds(thresholds, code.dimension())?;
    let report = gpolar::run_trials(&code, &w, &thresholds, trials, seed)?;
    eprintln!(
        "trials={} p_er={} ±{} p_ue={} ±{}",
        report.trials, report.p_er_hat, report.p_er_ci95, report.p_ue_hat, report.p_ue_ci95
    );
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    inputs::write_output(output, &text)
}

fn sweep(
    code: &str,
    channel: &ChannelArgs,
    grid: &str,
    trials: u64,
    seed: u64,
    format: OutputFormat,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let (artifact, code) = inputs::code_artifact(code)?;
    let w = inputs::channel_or_artifact(channel, &artifact)?;
    let grid = inputs::grid(grid)?;
    let curve: TradeoffCurve = sweep_thresholds(&code, &w, &grid, trials, seed)?;
    let text = match format {
        OutputFormat::Csv => curve.to_csv(),
        OutputFormat::Json => serde_json::to_string_pretty(&curve).expect("curve serializes"),
    };
    inputs::write_output(output, &text)
}
