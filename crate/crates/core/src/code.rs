//! Generalized polar codes: information-set construction and the butterfly
//! encoder.
//!
//! A code of `n` polarization steps maps `N = 2^n` carrier positions onto the
//! columns of the `n`-fold Kronecker power of `F = [[1, 1], [0, 1]]`.
//! Position `i` (1-based) corresponds to the synthetic channel reached by the
//! sign sequence read off the binary expansion of `i - 1`, most significant
//! bit first, with `0 -> '-'` and `1 -> '+'`: stage one of the butterfly
//! combines the two halves of the block, matching the first sign.

use serde::{Deserialize, Serialize};

use crate::channel::{BscMixture, ChannelDoc};
use crate::error::{Error, Result};

/// One polarization step: the check-node (`-`) or variable-node (`+`) side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

/// A sequence of polarization steps identifying one synthetic channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignSequence {
    signs: Vec<Sign>,
}

impl SignSequence {
    /// Wraps an explicit sign list.
    pub fn new(signs: Vec<Sign>) -> Self {
        Self { signs }
    }

    /// The sign sequence of carrier index `i` in `1..=2^n`.
    pub fn from_index(index: usize, n: u32) -> Result<Self> {
        let len = 1usize << n;
        if index == 0 || index > len {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let bits = index - 1;
        let signs = (0..n)
            .map(|k| {
                if (bits >> (n - 1 - k)) & 1 == 0 {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            })
            .collect();
        Ok(Self { signs })
    }

    /// The carrier index in `1..=2^n` this sequence stands for.
    pub fn to_index(&self) -> usize {
        let mut bits = 0usize;
        for &s in &self.signs {
            bits = (bits << 1) | matches!(s, Sign::Plus) as usize;
        }
        bits + 1
    }

    /// The signs in application order.
    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    /// Number of polarization steps.
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    /// True for the empty sequence (the channel itself).
    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

impl std::fmt::Display for SignSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.signs {
            f.write_str(match s {
                Sign::Minus => "-",
                Sign::Plus => "+",
            })?;
        }
        Ok(())
    }
}

/// Which construction produced an information set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Polar,
    Rm,
    ZeroUe,
}

/// A generalized polar code: blocklength `2^n`, a sorted information set of
/// 1-based carrier indices, and the frozen values for the remaining
/// positions.
#[derive(Debug, Clone, PartialEq)]
pub struct GpCode {
    n: u32,
    info_set: Vec<usize>,
    frozen: Vec<u8>,
    is_info: Vec<bool>,
}

impl GpCode {
    /// Builds a code from explicit parameters. `frozen` holds the values of
    /// the non-information positions in increasing index order.
    pub fn new(n: u32, mut info_set: Vec<usize>, frozen: Vec<u8>) -> Result<Self> {
        let len = 1usize << n;
        info_set.sort_unstable();
        info_set.dedup();
        if info_set.iter().any(|&i| i == 0 || i > len) {
            return Err(Error::InvalidCode(format!(
                "information set contains an index outside 1..={len}"
            )));
        }
        if frozen.len() != len - info_set.len() {
            return Err(Error::InvalidCode(format!(
                "{} frozen values for {} frozen positions",
                frozen.len(),
                len - info_set.len()
            )));
        }
        if frozen.iter().any(|&b| b > 1) {
            return Err(Error::InvalidCode("frozen values must be bits".into()));
        }
        let mut is_info = vec![false; len];
        for &i in &info_set {
            is_info[i - 1] = true;
        }
        Ok(Self { n, info_set, frozen, is_info })
    }

    /// Same as [`GpCode::new`] with all-zero frozen values.
    pub fn with_zero_frozen(n: u32, info_set: Vec<usize>) -> Result<Self> {
        let len = 1usize << n;
        let mut sorted = info_set;
        sorted.sort_unstable();
        sorted.dedup();
        let frozen = vec![0u8; len - sorted.len()];
        Self::new(n, sorted, frozen)
    }

    /// Number of polarization steps.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Blocklength `N = 2^n`.
    pub fn block_len(&self) -> usize {
        1usize << self.n
    }

    /// Number of information bits.
    pub fn dimension(&self) -> usize {
        self.info_set.len()
    }

    /// `r / N`.
    pub fn rate(&self) -> f64 {
        self.dimension() as f64 / self.block_len() as f64
    }

    /// The sorted 1-based information set.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// Frozen values, one per non-information position in index order.
    pub fn frozen(&self) -> &[u8] {
        &self.frozen
    }

    /// True if 1-based position `index` carries an information bit.
    pub fn is_info(&self, index: usize) -> bool {
        self.is_info[index - 1]
    }

    /// Scatters message and frozen bits into the carrier vector `u~`.
    pub fn scatter(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.dimension() {
            return Err(Error::LengthMismatch {
                got: message.len(),
                expected: self.dimension(),
            });
        }
        let mut carrier = vec![0u8; self.block_len()];
        let mut next_info = 0;
        let mut next_frozen = 0;
        for (pos, slot) in carrier.iter_mut().enumerate() {
            if self.is_info[pos] {
                *slot = message[next_info] & 1;
                next_info += 1;
            } else {
                *slot = self.frozen[next_frozen];
                next_frozen += 1;
            }
        }
        Ok(carrier)
    }

    /// Encodes a message of `r` bits into a codeword of `N` bits.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        let mut carrier = self.scatter(message)?;
        polar_transform(&mut carrier);
        Ok(carrier)
    }
}

/// Multiplies a bit vector by the Kronecker-power generator in place:
/// `log2(N)` stages of `N/2` XORs, widest stage first.
///
/// The stages commute, and the transform is an involution over GF(2).
pub fn polar_transform(bits: &mut [u8]) {
    let len = bits.len();
    debug_assert!(len.is_power_of_two());
    let mut half = len / 2;
    while half >= 1 {
        let mut start = 0;
        while start < len {
            for k in start..start + half {
                bits[k] ^= bits[k + half];
            }
            start += 2 * half;
        }
        half /= 2;
    }
}

/// Information set of the `r` synthetic channels with the smallest
/// Bhattacharyya parameters; ties go to the smaller index.
pub fn construct_polar(w: &BscMixture, n: u32, r: usize, l_max: usize) -> Result<GpCode> {
    let len = 1usize << n;
    if r > len {
        return Err(Error::InvalidCode(format!("dimension {r} exceeds blocklength {len}")));
    }
    let ranked = rank_by_bhattacharyya(w, n, l_max);
    let info_set = ranked.into_iter().take(r).map(|(_, i)| i).collect();
    GpCode::with_zero_frozen(n, info_set)
}

fn rank_by_bhattacharyya(w: &BscMixture, n: u32, l_max: usize) -> Vec<(f64, usize)> {
    use rayon::prelude::*;
    let len = 1usize << n;
    let mut ranked: Vec<(f64, usize)> = (1..=len)
        .into_par_iter()
        .map(|i| {
            let signs = SignSequence::from_index(i, n).expect("index in range");
            let z = w.synthesize(&signs, l_max).params().bhattacharyya;
            (z, i)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked
}

/// Reed-Muller information set: the `r` columns of the generator with the
/// largest weight `2^popcount(i - 1)`; ties go to the larger index.
pub fn construct_rm(n: u32, r: usize) -> Result<GpCode> {
    let len = 1usize << n;
    if r > len {
        return Err(Error::InvalidCode(format!("dimension {r} exceeds blocklength {len}")));
    }
    let mut ranked: Vec<(u32, usize)> = (1..=len).map(|i| ((i - 1).count_ones(), i)).collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
    let info_set = ranked.into_iter().take(r).map(|(_, i)| i).collect();
    GpCode::with_zero_frozen(n, info_set)
}

/// Zero-undetected-error construction for rate `rate < ` the zero-error
/// capacity of `w`: designs a polar code for the erasure-channel reduction
/// `BEC(1 - I0)` and pairs it with all-zero thresholds.
pub fn construct_zero_ue(w: &BscMixture, n: u32, rate: f64, l_max: usize) -> Result<GpCode> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidProbability(rate));
    }
    let i0 = w.params().zero_error_capacity;
    if rate >= i0 {
        return Err(Error::RateAboveZeroErrorCapacity { rate, capacity: i0 });
    }
    let surrogate = BscMixture::bec(1.0 - i0)?;
    let len = 1usize << n;
    let r = (rate * len as f64).ceil() as usize;
    construct_polar(&surrogate, n, r.min(len), l_max)
}

/// Serializable description of a constructed code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeArtifact {
    pub n: u32,
    /// 1-based information set, sorted.
    pub info_set: Vec<usize>,
    /// Frozen values for the complement positions in index order.
    pub frozen_bits: Vec<u8>,
    pub construction: Construction,
    /// The channel the code was designed for, when one was involved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelDoc>,
}

impl CodeArtifact {
    /// Captures a code together with its provenance.
    pub fn from_code(code: &GpCode, construction: Construction, channel: Option<ChannelDoc>) -> Self {
        Self {
            n: code.n(),
            info_set: code.info_set().to_vec(),
            frozen_bits: code.frozen().to_vec(),
            construction,
            channel,
        }
    }

    /// Rebuilds the code, revalidating the parameters.
    pub fn to_code(&self) -> Result<GpCode> {
        GpCode::new(self.n, self.info_set.clone(), self.frozen_bits.clone())
    }

    /// Parses an artifact from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidCode(e.to_string()))
    }
}
