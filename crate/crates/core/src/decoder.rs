//! Successive cancellation decoding with per-bit erasure thresholds.
//!
//! Bit decisions work on unnormalized likelihood pairs `(l0, l1)` instead of
//! LLRs: a threshold of zero means "decide only under certainty", and
//! certainty is an exact zero in one slot, which a finite LLR cannot
//! represent. Pair arithmetic preserves exact zeros structurally — a product
//! that underflows is clamped to the smallest positive float rather than
//! collapsing to a spurious certainty — and every combine renormalizes the
//! pair so the larger slot is one.

use serde::{Deserialize, Serialize};

use crate::channel::{BscMixture, Observation};
use crate::code::GpCode;
use crate::error::{Error, Result};

/// Unnormalized likelihoods of a bit being `0` or `1`; zeros are exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodPair {
    pub l0: f64,
    pub l1: f64,
}

/// Outcome of a single thresholded bit decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Bit(u8),
    Erase,
}

/// Product that cannot underflow into a false certainty.
fn product(x: f64, y: f64) -> f64 {
    if x == 0.0 || y == 0.0 {
        0.0
    } else {
        (x * y).max(f64::MIN_POSITIVE)
    }
}

impl LikelihoodPair {
    /// Validates a pair: finite, non-negative, not both zero.
    pub fn new(l0: f64, l1: f64) -> Result<Self> {
        let pair = Self { l0, l1 };
        if pair.is_valid() {
            Ok(pair)
        } else {
            Err(Error::MalformedLikelihood(0))
        }
    }

    /// The certain-zero pair.
    pub fn certain(bit: u8) -> Self {
        if bit == 0 {
            Self { l0: 1.0, l1: 0.0 }
        } else {
            Self { l0: 0.0, l1: 1.0 }
        }
    }

    fn is_valid(self) -> bool {
        self.l0.is_finite()
            && self.l1.is_finite()
            && self.l0 >= 0.0
            && self.l1 >= 0.0
            && (self.l0 > 0.0 || self.l1 > 0.0)
    }

    /// Scales the pair so its larger slot equals one.
    pub fn normalized(self) -> Self {
        let m = self.l0.max(self.l1);
        Self { l0: self.l0 / m, l1: self.l1 / m }
    }

    /// Posterior probability of the bit being one.
    pub fn prob_one(self) -> f64 {
        if self.l1 == 0.0 {
            0.0
        } else if self.l0 == 0.0 {
            1.0
        } else {
            self.l1 / (self.l0 + self.l1)
        }
    }

    /// Check-node combine: likelihoods of the XOR of the two bits.
    pub fn check_combine(a: Self, b: Self) -> Self {
        Self {
            l0: product(a.l0, b.l0) + product(a.l1, b.l1),
            l1: product(a.l0, b.l1) + product(a.l1, b.l0),
        }
    }

    /// Variable-node combine given the decided XOR partner `u`.
    pub fn variable_combine(a: Self, b: Self, u: u8) -> Self {
        if u == 0 {
            Self { l0: product(a.l0, b.l0), l1: product(a.l1, b.l1) }
        } else {
            Self { l0: product(a.l1, b.l0), l1: product(a.l0, b.l1) }
        }
    }

    /// The threshold decision: `1` if the posterior of one is within `t` of
    /// certainty, `0` symmetrically, erasure otherwise. Boundaries decide.
    /// At `t = 0` only exact zeros decide; a rounded posterior never does.
    pub fn decide(self, t: f64) -> Decision {
        if self.l1 == 0.0 {
            return Decision::Bit(0);
        }
        if self.l0 == 0.0 {
            return Decision::Bit(1);
        }
        if t == 0.0 {
            return Decision::Erase;
        }
        let p1 = self.l1 / (self.l0 + self.l1);
        if p1 >= 1.0 - t {
            Decision::Bit(1)
        } else if p1 <= t {
            Decision::Bit(0)
        } else {
            Decision::Erase
        }
    }
}

/// Per-information-bit erasure thresholds, aligned with the sorted
/// information set of the code they decode.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdVector {
    values: Vec<f64>,
}

impl ThresholdVector {
    /// All-zero thresholds: the zero-undetected-error setting.
    pub fn zero(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    /// The same threshold for every information bit.
    pub fn uniform(len: usize, t: f64) -> Result<Self> {
        Self::from_values(vec![t; len])
    }

    /// Explicit per-bit thresholds; each must lie in `[0, 1/2]`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        for &t in &values {
            if !t.is_finite() || !(0.0..=0.5).contains(&t) {
                return Err(Error::InvalidThreshold(t));
            }
        }
        Ok(Self { values })
    }

    /// Thresholds in information-set order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of thresholds.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True for a rate-zero code.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// What a decode returned: the full message, or the first information index
/// (1-based carrier index) at which the decoder declared erasure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeResult {
    Message(Vec<u8>),
    Erasure { first_erased_index: usize },
}

/// The likelihood pair seen at one carrier position, recorded before the
/// decision was taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    /// 1-based carrier position.
    pub position: usize,
    /// Normalized pair at that position.
    pub pair: LikelihoodPair,
}

struct SceRun {
    frozen_values: Vec<u8>,
    is_info: Vec<bool>,
    thresholds: Vec<f64>,
    next_pos: usize,
    decisions: Vec<u8>,
    trace: Option<Vec<TraceStep>>,
}

impl SceRun {
    fn new(code: &GpCode, thresholds: &ThresholdVector, traced: bool) -> Result<Self> {
        if thresholds.len() != code.dimension() {
            return Err(Error::LengthMismatch {
                got: thresholds.len(),
                expected: code.dimension(),
            });
        }
        let len = code.block_len();
        let frozen_values = code.scatter(&vec![0u8; code.dimension()])?;
        let mut is_info = vec![false; len];
        let mut per_pos = vec![0.0f64; len];
        for (k, &i) in code.info_set().iter().enumerate() {
            is_info[i - 1] = true;
            per_pos[i - 1] = thresholds.values()[k];
        }
        Ok(Self {
            frozen_values,
            is_info,
            thresholds: per_pos,
            next_pos: 0,
            decisions: Vec::with_capacity(code.dimension()),
            trace: traced.then(Vec::new),
        })
    }

    /// Decodes the subtree fed by `pairs`, returning its re-encoded
    /// sub-codeword, or the 1-based carrier index of the first erasure.
    fn decode_node(&mut self, pairs: Vec<LikelihoodPair>) -> std::result::Result<Vec<u8>, usize> {
        if pairs.len() == 1 {
            let pos = self.next_pos;
            self.next_pos += 1;
            let pair = pairs[0].normalized();
            if let Some(trace) = &mut self.trace {
                trace.push(TraceStep { position: pos + 1, pair });
            }
            let bit = if self.is_info[pos] {
                match pair.decide(self.thresholds[pos]) {
                    Decision::Bit(b) => {
                        self.decisions.push(b);
                        b
                    }
                    Decision::Erase => return Err(pos + 1),
                }
            } else {
                self.frozen_values[pos]
            };
            return Ok(vec![bit]);
        }
        let half = pairs.len() / 2;
        let upper: Vec<LikelihoodPair> = (0..half)
            .map(|k| LikelihoodPair::check_combine(pairs[k], pairs[k + half]).normalized())
            .collect();
        let left = self.decode_node(upper)?;
        let lower: Vec<LikelihoodPair> = (0..half)
            .map(|k| {
                LikelihoodPair::variable_combine(pairs[k], pairs[k + half], left[k]).normalized()
            })
            .collect();
        let right = self.decode_node(lower)?;
        let mut codeword = Vec::with_capacity(pairs.len());
        for k in 0..half {
            codeword.push(left[k] ^ right[k]);
        }
        codeword.extend(right);
        Ok(codeword)
    }
}

fn validate_pairs(code: &GpCode, pairs: &[LikelihoodPair]) -> Result<()> {
    if pairs.len() != code.block_len() {
        return Err(Error::LengthMismatch { got: pairs.len(), expected: code.block_len() });
    }
    for (k, p) in pairs.iter().enumerate() {
        if !p.is_valid() {
            return Err(Error::MalformedLikelihood(k));
        }
    }
    Ok(())
}

/// Successive cancellation decoding with erasure: information bits are
/// decided in carrier order through the per-bit thresholds, frozen bits are
/// set from the code, and the first undecidable bit aborts the run.
pub fn sce_decode(
    code: &GpCode,
    pairs: &[LikelihoodPair],
    thresholds: &ThresholdVector,
) -> Result<DecodeResult> {
    validate_pairs(code, pairs)?;
    let mut run = SceRun::new(code, thresholds, false)?;
    Ok(match run.decode_node(pairs.to_vec()) {
        Ok(_) => DecodeResult::Message(run.decisions),
        Err(index) => DecodeResult::Erasure { first_erased_index: index },
    })
}

/// Same as [`sce_decode`], also returning the normalized likelihood pair seen
/// at every carrier position up to the stopping point.
pub fn sce_decode_traced(
    code: &GpCode,
    pairs: &[LikelihoodPair],
    thresholds: &ThresholdVector,
) -> Result<(DecodeResult, Vec<TraceStep>)> {
    validate_pairs(code, pairs)?;
    let mut run = SceRun::new(code, thresholds, true)?;
    let result = match run.decode_node(pairs.to_vec()) {
        Ok(_) => DecodeResult::Message(run.decisions),
        Err(index) => DecodeResult::Erasure { first_erased_index: index },
    };
    Ok((result, run.trace.unwrap()))
}

/// The likelihood pair delivered by one mixture-channel observation.
pub fn observation_pair(w: &BscMixture, obs: Observation) -> Result<LikelihoodPair> {
    Ok(LikelihoodPair { l0: w.likelihood(obs, 0)?, l1: w.likelihood(obs, 1)? })
}

/// Exact posterior pair of the next undecided carrier bit, by enumerating
/// every completion of the carrier vector. Exponential in the blocklength;
/// the independent ground truth the fast decoder is checked against.
pub fn exhaustive_posterior(
    code: &GpCode,
    w: &BscMixture,
    received: &[Observation],
    decided: &[u8],
) -> Result<LikelihoodPair> {
    let len = code.block_len();
    if len > 16 {
        return Err(Error::BlocklengthTooLarge(len));
    }
    if received.len() != len {
        return Err(Error::LengthMismatch { got: received.len(), expected: len });
    }
    if decided.len() >= len {
        return Err(Error::LengthMismatch { got: decided.len(), expected: len - 1 });
    }
    let mut like = vec![[0.0f64; 2]; len];
    for (j, &obs) in received.iter().enumerate() {
        like[j][0] = w.likelihood(obs, 0)?;
        like[j][1] = w.likelihood(obs, 1)?;
    }
    let k = decided.len();
    let free = len - k - 1;
    let mut sums = [0.0f64; 2];
    let mut carrier = vec![0u8; len];
    for (slot, &bit) in carrier.iter_mut().zip(decided.iter()) {
        *slot = bit & 1;
    }
    for target in 0..2u8 {
        let mut total = 0.0f64;
        for suffix in 0..(1usize << free) {
            carrier[k] = target;
            for t in 0..free {
                carrier[k + 1 + t] = ((suffix >> t) & 1) as u8;
            }
            let mut word = carrier.clone();
            crate::code::polar_transform(&mut word);
            let mut prob = 1.0f64;
            for (j, &x) in word.iter().enumerate() {
                prob *= like[j][x as usize];
                if prob == 0.0 {
                    break;
                }
            }
            total += prob;
        }
        sums[target as usize] = total;
    }
    Ok(LikelihoodPair { l0: sums[0], l1: sums[1] })
}
