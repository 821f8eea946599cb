//! Generalized polar codes over binary memoryless symmetric channels.
//!
//! The crate models a BMS channel as a weighted mixture of binary symmetric
//! channels ([`BscMixture`]), evolves that representation through the
//! polarization transforms, constructs generalized polar codes (standard
//! polar, Reed-Muller, and the zero-undetected-error design), encodes and
//! decodes them with a successive cancellation decoder that can erase on a
//! per-bit threshold, and measures or predicts the trade-off between erasure
//! probability and undetected-error probability.
//!
//! Modules:
//! - [`channel`]: mixtures, their parameters, and the `-`/`+` transforms.
//! - [`code`]: information-set constructions and the butterfly encoder.
//! - [`decoder`]: thresholded successive cancellation plus an exhaustive
//!   posterior oracle for small blocklengths.
//! - [`analysis`]: operating points, union bounds, polarization statistics.
//! - [`sim`]: seeded, reproducible Monte Carlo runs and threshold sweeps.

pub mod analysis;
pub mod channel;
pub mod code;
pub mod decoder;
pub mod error;
pub mod sim;

pub use analysis::{
    fraction_polarized, inverse_q, operating_point, per_index_table, polarization_path,
    scaling_exponent, trajectory_along, undetected_lower_bound, union_bound_erasure,
    union_bound_point, AnalysisRow, OperatingPoint, PolarizationPath,
};
pub use channel::{
    BscMixture, ChannelDoc, ChannelParams, Component, ComponentDoc, CrossoverProb, Form,
    Observation, DEFAULT_L_MAX, DEFAULT_MERGE_TOL,
};
pub use code::{
    construct_polar, construct_rm, construct_zero_ue, polar_transform, CodeArtifact, Construction,
    GpCode, Sign, SignSequence,
};
pub use decoder::{
    exhaustive_posterior, observation_pair, sce_decode, sce_decode_traced, DecodeResult, Decision,
    LikelihoodPair, ThresholdVector, TraceStep,
};
pub use error::{Error, Result};
pub use sim::{
    run_trials, sample_output, sweep_thresholds, SimReport, TradeoffCurve, TradeoffPoint,
};
