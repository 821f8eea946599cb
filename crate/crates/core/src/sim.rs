//! Reproducible Monte Carlo measurement of erasure and undetected-error
//! probabilities.
//!
//! Trial `k` draws all of its randomness from an independent ChaCha8 stream
//! selected by `(seed, k)`, so a report depends only on the inputs and the
//! seed: worker count and scheduling cannot change a single count. Tallies
//! merge by integer addition, which commutes exactly.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{union_bound_point, OperatingPoint};
use crate::channel::{BscMixture, Observation, DEFAULT_L_MAX, DEFAULT_MERGE_TOL};
use crate::code::GpCode;
use crate::decoder::{observation_pair, sce_decode, DecodeResult, LikelihoodPair, ThresholdVector};
use crate::error::{Error, Result};

/// Tallies and estimates from one Monte Carlo run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: u64,
    pub erasures: u64,
    pub undetected_errors: u64,
    pub correct: u64,
    pub p_er_hat: f64,
    pub p_ue_hat: f64,
    /// Wilson 95% half-width; `3/trials` (rule of three) when nothing was
    /// observed.
    pub p_er_ci95: f64,
    pub p_ue_ci95: f64,
    pub seed: u64,
    pub wallclock_seconds: f64,
}

impl SimReport {
    /// Equality of everything except the wallclock, which is the part the
    /// determinism contract covers.
    pub fn same_counts(&self, other: &Self) -> bool {
        self.trials == other.trials
            && self.erasures == other.erasures
            && self.undetected_errors == other.undetected_errors
            && self.correct == other.correct
            && self.seed == other.seed
    }
}

/// 95% Wilson score half-width for `count` successes out of `trials`.
fn wilson_halfwidth(count: u64, trials: u64) -> f64 {
    if count == 0 {
        return 3.0 / trials as f64;
    }
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = count as f64 / n;
    (z / (1.0 + z * z / n)) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()
}

/// Draws one channel output for transmitted bit `input`: picks the component
/// by its mass, then flips the bit with the component's crossover
/// probability. The flip draw always happens, so the stream layout does not
/// depend on the component drawn.
pub fn sample_output<R: Rng + ?Sized>(w: &BscMixture, input: u8, rng: &mut R) -> Observation {
    let components = w.components();
    let u: f64 = rng.gen();
    let mut component = components.len() - 1;
    let mut acc = 0.0;
    for (k, c) in components.iter().enumerate() {
        acc += c.mass();
        if u < acc {
            component = k;
            break;
        }
    }
    let flip = rng.gen::<f64>() < components[component].crossover().value();
    Observation { component, bit: input ^ (flip as u8) }
}

#[derive(Default, Clone, Copy)]
struct Counts {
    erasures: u64,
    undetected: u64,
    correct: u64,
}

impl Counts {
    fn merge(self, other: Self) -> Self {
        Self {
            erasures: self.erasures + other.erasures,
            undetected: self.undetected + other.undetected,
            correct: self.correct + other.correct,
        }
    }
}

enum Outcome {
    Correct,
    Erasure,
    Undetected,
}

fn run_one(
    code: &GpCode,
    w: &BscMixture,
    thresholds: &ThresholdVector,
    rng: &mut ChaCha8Rng,
) -> Outcome {
    let r = code.dimension();
    let message: Vec<u8> = (0..r).map(|_| rng.gen::<bool>() as u8).collect();
    let codeword = code.encode(&message).expect("message length matches dimension");
    let pairs: Vec<LikelihoodPair> = codeword
        .iter()
        .map(|&bit| {
            let obs = sample_output(w, bit, rng);
            observation_pair(w, obs).expect("sampled component exists")
        })
        .collect();
    match sce_decode(code, &pairs, thresholds).expect("pairs are well formed") {
        DecodeResult::Erasure { .. } => Outcome::Erasure,
        DecodeResult::Message(decoded) => {
            if decoded == message {
                Outcome::Correct
            } else {
                Outcome::Undetected
            }
        }
    }
}

/// Runs `trials` independent encode/transmit/decode rounds with uniform
/// messages and tallies the outcomes.
pub fn run_trials(
    code: &GpCode,
    w: &BscMixture,
    thresholds: &ThresholdVector,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::Numeric("at least one trial required".into()));
    }
    if thresholds.len() != code.dimension() {
        return Err(Error::LengthMismatch {
            got: thresholds.len(),
            expected: code.dimension(),
        });
    }
    let start = Instant::now();
    let canonical = w.canonicalize(DEFAULT_MERGE_TOL);
    let counts = (0..trials)
        .into_par_iter()
        .fold(Counts::default, |mut counts, k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            match run_one(code, &canonical, thresholds, &mut rng) {
                Outcome::Correct => counts.correct += 1,
                Outcome::Erasure => counts.erasures += 1,
                Outcome::Undetected => counts.undetected += 1,
            }
            counts
        })
        .reduce(Counts::default, Counts::merge);
    Ok(SimReport {
        trials,
        erasures: counts.erasures,
        undetected_errors: counts.undetected,
        correct: counts.correct,
        p_er_hat: counts.erasures as f64 / trials as f64,
        p_ue_hat: counts.undetected as f64 / trials as f64,
        p_er_ci95: wilson_halfwidth(counts.erasures, trials),
        p_ue_ci95: wilson_halfwidth(counts.undetected, trials),
        seed,
        wallclock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One grid point of a threshold sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub threshold: f64,
    pub label: String,
    pub measured: OperatingPoint,
    pub p_er_ci95: f64,
    pub p_ue_ci95: f64,
    pub predicted: OperatingPoint,
}

/// Measured and predicted operating points across a threshold grid, sorted
/// by measured erasure probability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub points: Vec<TradeoffPoint>,
}

impl TradeoffCurve {
    /// Fixed-column CSV, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p_er_hat,p_er_ci,p_ue_hat,p_ue_ci,p_er_predicted\n");
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                p.threshold,
                p.measured.p_er,
                p.p_er_ci95,
                p.measured.p_ue,
                p.p_ue_ci95,
                p.predicted.p_er
            )
            .expect("writing to a string cannot fail");
        }
        out
    }
}

/// Measures the trade-off curve over a grid of uniform thresholds. Every
/// grid point reuses the same seed, so all points see the same messages and
/// channel noise; only the decision thresholds differ.
pub fn sweep_thresholds(
    code: &GpCode,
    w: &BscMixture,
    grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<TradeoffCurve> {
    if grid.is_empty() {
        return Err(Error::Numeric("threshold grid must be non-empty".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let thresholds = ThresholdVector::uniform(code.dimension(), t)?;
        let report = run_trials(code, w, &thresholds, trials, seed)?;
        let predicted = union_bound_point(code, w, &thresholds, DEFAULT_L_MAX)?;
        points.push(TradeoffPoint {
            threshold: t,
            label: format!("t={t}"),
            measured: OperatingPoint { p_er: report.p_er_hat, p_ue: report.p_ue_hat },
            p_er_ci95: report.p_er_ci95,
            p_ue_ci95: report.p_ue_ci95,
            predicted,
        });
    }
    points.sort_by(|a, b| {
        a.measured.p_er.total_cmp(&b.measured.p_er).then(a.threshold.total_cmp(&b.threshold))
    });
    Ok(TradeoffCurve { points })
}
