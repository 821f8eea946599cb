//! Flag-value parsing: `@file` indirection, channel documents, code
//! artifacts, threshold specs, bit strings and grids.

use std::fs;
use std::path::Path;

use gpolar::{BscMixture, ChannelDoc, CodeArtifact, GpCode, LikelihoodPair, Observation, ThresholdVector};

use crate::{ChannelArgs, CliError};

/// Resolves `@path` arguments to file contents, passes anything else
/// through.
pub fn resolve(value: &str) -> Result<String, CliError> {
    if let Some(path) = value.strip_prefix('@') {
        Ok(fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?)
    } else {
        Ok(value.to_string())
    }
}

impl ChannelArgs {
    /// The channel document described by the flags, if any was given.
    pub fn doc(&self) -> Result<Option<ChannelDoc>, CliError> {
        if let Some(e) = self.bec {
            return Ok(Some(ChannelDoc::from_bec(e)));
        }
        if let Some(e) = self.bsc {
            return Ok(Some(ChannelDoc::from_bsc(e)));
        }
        if let Some(spec) = &self.channel {
            let text = resolve(spec)?;
            return Ok(Some(ChannelDoc::from_json(&text)?));
        }
        Ok(None)
    }

    /// Like [`ChannelArgs::doc`] but the channel is mandatory.
    pub fn required(&self) -> Result<ChannelDoc, CliError> {
        self.doc()?.ok_or_else(|| {
            CliError::Validation("a channel is required: --bec, --bsc or --channel".into())
        })
    }
}

/// Parses a code artifact from inline JSON or `@file` and validates it.
pub fn code_artifact(spec: &str) -> Result<(CodeArtifact, GpCode), CliError> {
    let text = resolve(spec)?;
    let artifact = CodeArtifact::from_json(&text)?;
    let code = artifact.to_code()?;
    Ok((artifact, code))
}

/// Threshold spec: `zero`, a scalar, or `@file` with a JSON array aligned
/// with the information set.
pub fn thresholds(spec: &str, dimension: usize) -> Result<ThresholdVector, CliError> {
    if spec == "zero" {
        return Ok(ThresholdVector::zero(dimension));
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?;
        let values: Vec<f64> = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("threshold file: {e}")))?;
        if values.len() != dimension {
            return Err(CliError::Validation(format!(
                "threshold file has {} entries for {} information bits",
                values.len(),
                dimension
            )));
        }
        return Ok(ThresholdVector::from_values(values)?);
    }
    let t: f64 = spec
        .parse()
        .map_err(|_| CliError::Validation(format!("invalid threshold spec {spec:?}")))?;
    Ok(ThresholdVector::uniform(dimension, t)?)
}

/// Message bits: a compact 0/1 string or `@file` with a JSON bit array.
pub fn message_bits(spec: &str) -> Result<Vec<u8>, CliError> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?;
        let bits: Vec<u8> = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("message file: {e}")))?;
        if bits.iter().any(|&b| b > 1) {
            return Err(CliError::Validation("message bits must be 0 or 1".into()));
        }
        return Ok(bits);
    }
    spec.chars()
        .map(|c| match c {
            '0' => Ok(0u8),
            '1' => Ok(1u8),
            other => Err(CliError::Validation(format!("invalid message bit {other:?}"))),
        })
        .collect()
}

/// Likelihood pairs from a JSON array of `[l0, l1]`.
pub fn likelihood_pairs(spec: &str) -> Result<Vec<LikelihoodPair>, CliError> {
    let text = resolve(spec)?;
    let raw: Vec<[f64; 2]> = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("likelihoods: {e}")))?;
    Ok(raw.into_iter().map(|[l0, l1]| LikelihoodPair { l0, l1 }).collect())
}

/// Observations from a JSON array of `[component, bit]`.
pub fn observations(spec: &str) -> Result<Vec<Observation>, CliError> {
    let text = resolve(spec)?;
    let raw: Vec<[u64; 2]> = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("observations: {e}")))?;
    raw.into_iter()
        .map(|[component, bit]| {
            if bit > 1 {
                return Err(CliError::Validation(format!("observation bit {bit} not 0/1")));
            }
            Ok(Observation { component: component as usize, bit: bit as u8 })
        })
        .collect()
}

/// Threshold grid: `start:step:end` (inclusive) or a comma list.
pub fn grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: &str| CliError::Validation(format!("invalid grid {spec:?}: {m}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:end"));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad("start"))?;
        let step: f64 = parts[1].parse().map_err(|_| bad("step"))?;
        let end: f64 = parts[2].parse().map_err(|_| bad("end"))?;
        if step <= 0.0 || end < start {
            return Err(bad("need step > 0 and end >= start"));
        }
        let mut values = Vec::new();
        let mut k = 0u32;
        loop {
            let t = start + f64::from(k) * step;
            if t > end + 1e-9 {
                break;
            }
            values.push(t.min(end));
            k += 1;
        }
        Ok(values)
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(s)))
            .collect()
    }
}

/// Channel from explicit flags, falling back to the one recorded in the
/// artifact.
pub fn channel_or_artifact(
    args: &ChannelArgs,
    artifact: &CodeArtifact,
) -> Result<BscMixture, CliError> {
    if let Some(doc) = args.doc()? {
        return Ok(doc.to_mixture()?);
    }
    if let Some(doc) = &artifact.channel {
        return Ok(doc.to_mixture()?);
    }
    Err(CliError::Validation(
        "no channel given and the code artifact does not record one".into(),
    ))
}

/// Writes to the path or stdout; file content always ends with a newline.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => {
            let mut text = content.to_string();
            if !text.ends_with('\n') {
                text.push('\n');
            }
            fs::write(path, text)
                .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}
