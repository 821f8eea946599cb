//! Analytic predictions for erasure schemes: per-synthetic-channel operating
//! points, the undetected-error lower bound, union-bound erasure estimates,
//! the polarization random process, and the erasure scaling exponent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{BscMixture, ChannelParams, DEFAULT_MERGE_TOL};
use crate::code::{GpCode, Sign, SignSequence};
use crate::decoder::ThresholdVector;
use crate::error::{Error, Result};

/// Erasure and undetected-error probabilities of one thresholded decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub p_er: f64,
    pub p_ue: f64,
}

/// The operating point of a `D_t` decision on a mixture channel: components
/// noisier than `t` erase, decidable components contribute their crossover
/// probability as undetected-error mass. Boundary components decide.
pub fn operating_point(ws: &BscMixture, t: f64) -> OperatingPoint {
    let w = ws.canonicalize(DEFAULT_MERGE_TOL);
    let mut p_er = 0.0;
    let mut p_ue = 0.0;
    for c in w.components() {
        let eps = c.crossover().value();
        if eps > t {
            p_er += c.mass();
        } else {
            p_ue += eps * c.mass();
        }
    }
    OperatingPoint { p_er, p_ue }
}

/// Lower bound on the undetected-error probability of any decision rule on
/// `ws` that erases with probability `p_er`: every decided imperfect
/// component errs at least with the best imperfect crossover.
pub fn undetected_lower_bound(ws: &BscMixture, p_er: f64) -> f64 {
    let params = ws.params();
    (params.best_imperfect * (1.0 - params.zero_error_capacity - p_er)).max(0.0)
}

fn polarization_step(w: &BscMixture, sign: Sign, l_max: usize) -> BscMixture {
    let next = match sign {
        Sign::Minus => w.transform_minus(),
        Sign::Plus => w.transform_plus(),
    };
    if next.len() > l_max {
        next.degrade(l_max)
    } else {
        next
    }
}

/// Channel parameters along an explicit transform path, starting with the
/// channel itself: `signs.len() + 1` entries.
pub fn trajectory_along(w: &BscMixture, signs: &SignSequence, l_max: usize) -> Vec<ChannelParams> {
    let mut cur = w.canonicalize(DEFAULT_MERGE_TOL);
    let mut steps = Vec::with_capacity(signs.len() + 1);
    steps.push(cur.params());
    for &sign in signs.signs() {
        cur = polarization_step(&cur, sign, l_max);
        steps.push(cur.params());
    }
    steps
}

/// One sampled trajectory of the polarization process.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationPath {
    /// The uniformly drawn transform choices.
    pub signs: SignSequence,
    /// Parameters of the channel before and after each step.
    pub steps: Vec<ChannelParams>,
}

/// Samples `n` uniform transform choices from `seed` and records the channel
/// parameters along the way.
pub fn polarization_path(w: &BscMixture, n: u32, seed: u64, l_max: usize) -> PolarizationPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signs = SignSequence::new(
        (0..n).map(|_| if rng.gen::<bool>() { Sign::Plus } else { Sign::Minus }).collect(),
    );
    let steps = trajectory_along(w, &signs, l_max);
    PolarizationPath { signs, steps }
}

/// Number of sign sequences sampled when full enumeration is out of reach.
pub const POLARIZATION_SAMPLES: usize = 10_000;

/// Fractions of depth-`n` synthetic channels whose zero-error capacity has
/// polarized to within `delta` of one (first) and of zero (second).
///
/// Enumerates all `2^n` sequences for `n <= 12` and falls back to Monte
/// Carlo sampling driven by `seed` beyond that.
pub fn fraction_polarized(
    w: &BscMixture,
    n: u32,
    delta: f64,
    l_max: usize,
    seed: u64,
) -> (f64, f64) {
    let start = w.canonicalize(DEFAULT_MERGE_TOL);
    if n <= 12 {
        let mut high = 0u64;
        let mut low = 0u64;
        enumerate_paths(&start, n, delta, l_max, &mut high, &mut low);
        let total = (1u64 << n) as f64;
        (high as f64 / total, low as f64 / total)
    } else {
        let hits: Vec<(bool, bool)> = (0..POLARIZATION_SAMPLES as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k);
                let mut cur = start.clone();
                for _ in 0..n {
                    let sign = if rng.gen::<bool>() { Sign::Plus } else { Sign::Minus };
                    cur = polarization_step(&cur, sign, l_max);
                }
                let i0 = cur.params().zero_error_capacity;
                (i0 >= 1.0 - delta, i0 <= delta)
            })
            .collect();
        let total = hits.len() as f64;
        let high = hits.iter().filter(|h| h.0).count() as f64;
        let low = hits.iter().filter(|h| h.1).count() as f64;
        (high / total, low / total)
    }
}

fn enumerate_paths(
    w: &BscMixture,
    depth: u32,
    delta: f64,
    l_max: usize,
    high: &mut u64,
    low: &mut u64,
) {
    if depth == 0 {
        let i0 = w.params().zero_error_capacity;
        if i0 >= 1.0 - delta {
            *high += 1;
        }
        if i0 <= delta {
            *low += 1;
        }
        return;
    }
    for sign in [Sign::Minus, Sign::Plus] {
        let next = polarization_step(w, sign, l_max);
        enumerate_paths(&next, depth - 1, delta, l_max, high, low);
    }
}

/// Sum over the information set of the per-index `D_t` operating points:
/// an upper bound on the scheme erasure probability (exact first-erasure
/// marginals for a BEC at `t = 0`) and the matching undetected-error sum.
pub fn union_bound_point(
    code: &GpCode,
    w: &BscMixture,
    thresholds: &ThresholdVector,
    l_max: usize,
) -> Result<OperatingPoint> {
    if thresholds.len() != code.dimension() {
        return Err(Error::LengthMismatch {
            got: thresholds.len(),
            expected: code.dimension(),
        });
    }
    let base = w.canonicalize(DEFAULT_MERGE_TOL);
    let points: Vec<OperatingPoint> = code
        .info_set()
        .par_iter()
        .zip(thresholds.values().par_iter())
        .map(|(&index, &t)| {
            let signs = SignSequence::from_index(index, code.n()).expect("info index in range");
            operating_point(&base.synthesize(&signs, l_max), t)
        })
        .collect();
    // summed in information-set order for reproducibility
    let mut p_er = 0.0;
    let mut p_ue = 0.0;
    for p in points {
        p_er += p.p_er;
        p_ue += p.p_ue;
    }
    Ok(OperatingPoint { p_er: p_er.min(1.0), p_ue: p_ue.min(1.0) })
}

/// The erasure half of [`union_bound_point`].
pub fn union_bound_erasure(
    code: &GpCode,
    w: &BscMixture,
    thresholds: &ThresholdVector,
    l_max: usize,
) -> Result<f64> {
    Ok(union_bound_point(code, w, thresholds, l_max)?.p_er)
}

/// Standard normal tail probability.
fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of the standard normal tail, bisected to 1e-10.
pub fn inverse_q(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Numeric(format!("Q^-1 undefined at {p}")));
    }
    let mut lo = -40.0f64;
    let mut hi = 40.0f64;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Predicted doubly-exponential erasure exponent at blocklength `2^n` for a
/// zero-undetected-error scheme of rate `rate` on a channel of zero-error
/// capacity `i0`: `n/2 + Q^-1(rate/i0) * sqrt(n)/2`.
pub fn scaling_exponent(rate: f64, i0: f64, n: u32) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidProbability(rate));
    }
    if rate >= i0 {
        return Err(Error::RateAboveZeroErrorCapacity { rate, capacity: i0 });
    }
    let q_inv = inverse_q(rate / i0)?;
    let nf = n as f64;
    Ok(nf / 2.0 + q_inv * nf.sqrt() / 2.0)
}

/// One row of the per-index analysis table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub index: usize,
    pub signs: String,
    pub zero_error_capacity: f64,
    pub best_imperfect: f64,
    pub bhattacharyya: f64,
    pub capacity: f64,
    pub p_er: f64,
    pub p_ue: f64,
}

/// Parameters and `D_t` operating point of every depth-`n` synthetic
/// channel, uniform threshold `t`.
pub fn per_index_table(w: &BscMixture, n: u32, t: f64, l_max: usize) -> Vec<AnalysisRow> {
    let base = w.canonicalize(DEFAULT_MERGE_TOL);
    (1..=(1usize << n))
        .into_par_iter()
        .map(|index| {
            let signs = SignSequence::from_index(index, n).expect("index in range");
            let ws = base.synthesize(&signs, l_max);
            let params = ws.params();
            let point = operating_point(&ws, t);
            AnalysisRow {
                index,
                signs: signs.to_string(),
                zero_error_capacity: params.zero_error_capacity,
                best_imperfect: params.best_imperfect,
                bhattacharyya: params.bhattacharyya,
                capacity: params.capacity,
                p_er: point.p_er,
                p_ue: point.p_ue,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{CrossoverProb, DEFAULT_L_MAX};

    fn three_component() -> BscMixture {
        BscMixture::new(vec![
            (0.6, CrossoverProb::exact_zero()),
            (0.3, CrossoverProb::new(0.1).unwrap()),
            (0.1, CrossoverProb::exact_half()),
        ])
        .unwrap()
    }

    #[test]
    fn operating_point_examples() {
        let w = three_component();
        let p = operating_point(&w, 0.0);
        assert!((p.p_er - 0.4).abs() < 1e-15);
        assert_eq!(p.p_ue, 0.0);

        let p = operating_point(&w, 0.1);
        assert!((p.p_er - 0.1).abs() < 1e-15);
        assert!((p.p_ue - 0.03).abs() < 1e-15);

        let p = operating_point(&BscMixture::bsc(0.3).unwrap(), 0.0);
        assert_eq!(p.p_ue, 0.0);
        assert!((p.p_er - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lower_bound_examples() {
        let w = three_component();
        assert!((undetected_lower_bound(&w, 0.1) - 0.03).abs() < 1e-12);
        assert_eq!(undetected_lower_bound(&w, 0.5), 0.0);
        assert_eq!(undetected_lower_bound(&BscMixture::bec(0.0).unwrap(), 0.0), 0.0);
    }

    #[test]
    fn bound_is_tight_or_below_operating_point() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let l = rng.gen_range(1..=5);
            let mut parts: Vec<(f64, CrossoverProb)> = Vec::new();
            for _ in 0..l {
                let e = if rng.gen_bool(0.25) {
                    CrossoverProb::exact_zero()
                } else if rng.gen_bool(0.2) {
                    CrossoverProb::exact_half()
                } else {
                    CrossoverProb::new(rng.gen_range(0.01..0.49)).unwrap()
                };
                parts.push((rng.gen_range(0.05..1.0), e));
            }
            let total: f64 = parts.iter().map(|p| p.0).sum();
            let parts = parts.into_iter().map(|(p, e)| (p / total, e)).collect();
            let w = BscMixture::new(parts).unwrap();
            let t = rng.gen_range(0.0..=0.5);
            let point = operating_point(&w, t);
            assert!(point.p_ue >= undetected_lower_bound(&w, point.p_er) - 1e-12);
            assert!(point.p_er + point.p_ue <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn trajectory_all_plus_on_bec() {
        let w = BscMixture::bec(0.5).unwrap();
        let signs = SignSequence::new(vec![Sign::Plus; 3]);
        let steps = trajectory_along(&w, &signs, DEFAULT_L_MAX);
        assert_eq!(steps.len(), 4);
        // erasure parameter squares at every plus step
        assert!((steps[3].zero_error_capacity - (1.0 - 0.5f64.powi(8))).abs() < 1e-12);
        assert!((steps[3].zero_error_capacity - 0.99609375).abs() < 1e-12);
    }

    #[test]
    fn path_is_martingale_step_by_step() {
        let w = three_component();
        let path = polarization_path(&w, 5, 42, DEFAULT_L_MAX);
        assert_eq!(path.steps.len(), 6);
        let mut cur = w.canonicalize(DEFAULT_MERGE_TOL);
        for &sign in path.signs.signs() {
            let i0 = cur.params().zero_error_capacity;
            let minus = cur.transform_minus();
            let plus = cur.transform_plus();
            let avg = 0.5
                * (minus.params().zero_error_capacity + plus.params().zero_error_capacity);
            assert!((avg - i0).abs() < 1e-12);
            cur = match sign {
                Sign::Minus => minus,
                Sign::Plus => plus,
            };
        }
        // same seed, same path
        let again = polarization_path(&w, 5, 42, DEFAULT_L_MAX);
        assert_eq!(path, again);
    }

    #[test]
    fn trajectory_of_zero_steps_is_params() {
        let w = three_component();
        let path = polarization_path(&w, 0, 1, DEFAULT_L_MAX);
        assert_eq!(path.steps.len(), 1);
        assert_eq!(path.steps[0], w.params());
    }

    #[test]
    fn fraction_polarized_on_bec() {
        let w = BscMixture::bec(0.3).unwrap();

        // exact scalar enumeration as the oracle
        let n = 10u32;
        let mut eps = vec![0.3f64];
        for _ in 0..n {
            eps = eps.iter().flat_map(|&e| [2.0 * e - e * e, e * e]).collect();
        }
        for delta in [0.01, 0.05] {
            let exact_hi =
                eps.iter().filter(|&&e| 1.0 - e >= 1.0 - delta).count() as f64 / eps.len() as f64;
            let exact_lo =
                eps.iter().filter(|&&e| 1.0 - e <= delta).count() as f64 / eps.len() as f64;
            let (high, low) = fraction_polarized(&w, n, delta, DEFAULT_L_MAX, 0);
            assert_eq!((high, low), (exact_hi, exact_lo));
        }
        // the fractions head for (I0, 1 - I0) = (0.7, 0.3)
        let (high, low) = fraction_polarized(&w, n, 0.05, DEFAULT_L_MAX, 0);
        assert!((high - 0.7).abs() < 0.1, "high fraction {high}");
        assert!((low - 0.3).abs() < 0.1, "low fraction {low}");

        let (high, low) = fraction_polarized(&w, 0, 0.01, DEFAULT_L_MAX, 0);
        assert_eq!((high, low), (0.0, 0.0));

        let perfect = BscMixture::bec(0.0).unwrap();
        for n in [0, 3] {
            assert_eq!(fraction_polarized(&perfect, n, 0.01, DEFAULT_L_MAX, 0), (1.0, 0.0));
        }
    }

    #[test]
    fn fraction_polarized_monte_carlo_path() {
        // beyond the enumeration cap the sampled estimate lands near the
        // exact one
        let w = BscMixture::bec(0.3).unwrap();
        let n = 13u32;
        let mut eps = vec![0.3f64];
        for _ in 0..n {
            eps = eps.iter().flat_map(|&e| [2.0 * e - e * e, e * e]).collect();
        }
        let exact_hi =
            eps.iter().filter(|&&e| 1.0 - e >= 0.95).count() as f64 / eps.len() as f64;
        let (high, _) = fraction_polarized(&w, n, 0.05, DEFAULT_L_MAX, 1);
        let sigma = (exact_hi * (1.0 - exact_hi) / POLARIZATION_SAMPLES as f64).sqrt();
        assert!((high - exact_hi).abs() < 4.0 * sigma, "{high} vs {exact_hi}");
    }

    #[test]
    fn martingale_average_over_all_sequences() {
        // mean of I0 over all 2^n sign sequences equals I0 of the channel
        let eps = 0.35f64;
        let n = 10u32;
        let mut total = 0.0f64;
        for i in 0..(1usize << n) {
            let mut e = eps;
            for k in 0..n {
                let bit = (i >> (n - 1 - k)) & 1;
                e = if bit == 0 { 2.0 * e - e * e } else { e * e };
            }
            total += 1.0 - e; // I0 of BEC(e)
        }
        let avg = total / (1u64 << n) as f64;
        assert!((avg - (1.0 - eps)).abs() < 1e-9);
    }

    #[test]
    fn best_imperfect_never_drops_below_squared_floor() {
        use rand::{Rng, SeedableRng};
        let w = BscMixture::bsc(0.3).unwrap();
        let e0 = w.params().best_imperfect;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = rng.gen_range(1..=6u32);
            let signs = SignSequence::new(
                (0..n).map(|_| if rng.gen::<bool>() { Sign::Plus } else { Sign::Minus }).collect(),
            );
            let steps = trajectory_along(&w, &signs, DEFAULT_L_MAX);
            for (k, step) in steps.iter().enumerate() {
                let floor = e0.powi(1 << k as i32);
                assert!(step.best_imperfect >= floor - 1e-12);
            }
        }
    }

    #[test]
    fn union_bound_examples() {
        let w = BscMixture::bec(0.5).unwrap();
        let code = GpCode::with_zero_frozen(1, vec![2]).unwrap();
        let bound =
            union_bound_erasure(&code, &w, &ThresholdVector::zero(1), DEFAULT_L_MAX).unwrap();
        assert!((bound - 0.25).abs() < 1e-12);

        let full = GpCode::with_zero_frozen(1, vec![1, 2]).unwrap();
        let bound =
            union_bound_erasure(&full, &w, &ThresholdVector::zero(2), DEFAULT_L_MAX).unwrap();
        assert!((bound - (0.75 + 0.25)).abs() < 1e-12);

        let empty = GpCode::with_zero_frozen(1, vec![]).unwrap();
        let bound =
            union_bound_erasure(&empty, &w, &ThresholdVector::zero(0), DEFAULT_L_MAX).unwrap();
        assert_eq!(bound, 0.0);
    }

    #[test]
    fn scaling_exponent_examples() {
        // median of the normal: exponent is exactly n/2
        let e = scaling_exponent(0.5, 1.0, 10).unwrap();
        assert!((e - 5.0).abs() < 1e-9);
        assert_eq!(scaling_exponent(0.5, 1.0, 0).unwrap(), 0.0);

        // Q(0.5) ~ 0.3085
        let e = scaling_exponent(0.3085375387, 1.0, 16).unwrap();
        assert!((e - (8.0 + 0.5 * 2.0)).abs() < 1e-6);

        assert!(scaling_exponent(0.7, 0.6, 10).is_err());
        assert!(scaling_exponent(0.0, 0.6, 10).is_err());
    }

    #[test]
    fn inverse_q_round_trips() {
        for p in [0.0228, 0.1587, 0.5, 0.8413, 0.9772] {
            let x = inverse_q(p).unwrap();
            assert!((q_function(x) - p).abs() < 1e-9);
        }
        assert!((inverse_q(0.5).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn per_index_table_on_bec() {
        let w = BscMixture::bec(0.5).unwrap();
        let rows = per_index_table(&w, 1, 0.0, DEFAULT_L_MAX);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].signs, "-");
        assert!((rows[0].zero_error_capacity - 0.25).abs() < 1e-12);
        assert_eq!(rows[1].signs, "+");
        assert!((rows[1].zero_error_capacity - 0.75).abs() < 1e-12);
        assert!((rows[0].p_er - 0.75).abs() < 1e-12);
        assert!((rows[1].p_er - 0.25).abs() < 1e-12);
    }
}
