//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by channel construction, code construction, decoding and
/// simulation.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A probability-like value fell outside its admissible range.
    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    /// Mixture masses must be positive and sum to one.
    #[error("mixture masses sum to {0}, expected 1 within 1e-12")]
    MassNotNormalized(f64),

    /// A mixture component had a non-positive or non-finite mass.
    #[error("invalid component mass {0}")]
    InvalidMass(f64),

    /// A channel index was outside `1..=2^n`.
    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: u32 },

    /// Information set or frozen vector inconsistent with the blocklength.
    #[error("invalid code parameters: {0}")]
    InvalidCode(String),

    /// A bit vector had the wrong length.
    #[error("length mismatch: got {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },

    /// The zero-undetected-error construction requires a rate strictly below
    /// the zero-error capacity of the channel.
    #[error("rate {rate} is not below the zero-error capacity {capacity}")]
    RateAboveZeroErrorCapacity { rate: f64, capacity: f64 },

    /// Exhaustive enumeration is limited to small blocklengths.
    #[error("blocklength {0} too large for exhaustive enumeration")]
    BlocklengthTooLarge(usize),

    /// A likelihood pair was negative, non-finite or identically zero.
    #[error("malformed likelihood pair at position {0}")]
    MalformedLikelihood(usize),

    /// A threshold fell outside `[0, 1/2]`.
    #[error("invalid threshold {0}, must lie in [0, 1/2]")]
    InvalidThreshold(f64),

    /// A channel document did not describe exactly one channel.
    #[error("invalid channel document: {0}")]
    InvalidChannelDocument(String),

    /// An observation referenced a component the channel does not have.
    #[error("observation references component {component}, channel has {count}")]
    UnknownComponent { component: usize, count: usize },

    /// A numeric routine failed to produce a finite result.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
