//! BMS channels represented as finite mixtures of binary symmetric channels.
//!
//! Every binary memoryless symmetric channel with a finite output alphabet is
//! equivalent to a weighted mixture of BSCs: each channel use picks a
//! component `BSC(eps_i)` with probability `p_i`, transmits the bit through
//! it, and the receiver learns which component was used. [`BscMixture`]
//! stores that decomposition directly and implements the polarization
//! transforms on it, so a synthetic channel is again a mixture and all its
//! parameters can be read off in closed form.
//!
//! Crossover probabilities of exactly `0` and exactly `1/2` carry explicit
//! flags instead of being recognized by comparing floats. The mass sitting at
//! zero is the channel's zero-undetected-error capacity and the smallest
//! positive crossover sets the undetected-error floor; both are discontinuous
//! in the decomposition, so rounding must never create or destroy a flagged
//! component. Arithmetic propagates the flags structurally and keeps every
//! unflagged crossover strictly inside `(0, 1/2)`.

use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::code::{Sign, SignSequence};
use crate::error::{Error, Result};

/// Default tolerance below which two unflagged crossovers merge during
/// canonicalization.
pub const DEFAULT_MERGE_TOL: f64 = 1e-9;

/// Default cap on the number of mixture components kept during synthesis.
pub const DEFAULT_L_MAX: usize = 256;

/// Largest `f64` strictly below one half.
const BELOW_HALF: f64 = 0.499_999_999_999_999_94;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Zero,
    Half,
    One,
    General,
}

/// A crossover probability in `[0, 1]` with exactness flags for the three
/// values (`0`, `1/2`, `1`) that the mixture operations must treat exactly.
///
/// Flags are set only by construction or by arithmetic rules that guarantee
/// exactness; a computed value that merely rounds to `0.0` or `0.5` stays
/// unflagged and is nudged back into the open interval when it enters a
/// mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverProb {
    value: f64,
    tag: Tag,
}

impl CrossoverProb {
    /// Creates a crossover probability, flagging bit-exact `0`, `1/2` and `1`.
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidProbability(value));
        }
        let tag = if value == 0.0 {
            Tag::Zero
        } else if value == 0.5 {
            Tag::Half
        } else if value == 1.0 {
            Tag::One
        } else {
            Tag::General
        };
        Ok(Self { value, tag })
    }

    /// The perfectly clean component, `eps = 0`.
    pub fn exact_zero() -> Self {
        Self { value: 0.0, tag: Tag::Zero }
    }

    /// The pure-noise component, `eps = 1/2`.
    pub fn exact_half() -> Self {
        Self { value: 0.5, tag: Tag::Half }
    }

    fn exact_one() -> Self {
        Self { value: 1.0, tag: Tag::One }
    }

    /// An unflagged crossover, clamped into the open interval `(0, 1/2)`.
    ///
    /// Used for every computed crossover that is mathematically neither `0`
    /// nor `1/2`: an underflow or a last-ulp rounding must not let it collide
    /// with a flagged value.
    fn general_open(value: f64) -> Self {
        let v = if value <= 0.0 {
            f64::MIN_POSITIVE
        } else if value >= 0.5 {
            BELOW_HALF
        } else {
            value
        };
        Self { value: v, tag: Tag::General }
    }

    /// The numeric value of the crossover probability.
    pub fn value(self) -> f64 {
        self.value
    }

    /// True iff the crossover is flagged as exactly `0`.
    pub fn is_exact_zero(self) -> bool {
        self.tag == Tag::Zero
    }

    /// True iff the crossover is flagged as exactly `1/2`.
    pub fn is_exact_half(self) -> bool {
        self.tag == Tag::Half
    }

    /// `min(eps, 1 - eps)`, the representative in `[0, 1/2]`.
    ///
    /// `BSC(eps)` and `BSC(1 - eps)` are the same channel up to relabeling,
    /// so this folds a crossover onto the canonical side. Flags are
    /// preserved; an exact `1` folds to an exact `0`.
    pub fn folded(self) -> Self {
        match self.tag {
            Tag::Zero | Tag::Half => self,
            Tag::One => Self::exact_zero(),
            Tag::General => {
                let v = if self.value > 0.5 { 1.0 - self.value } else { self.value };
                Self { value: v, tag: Tag::General }
            }
        }
    }

    /// `1 - eps`, with flags carried along.
    pub fn complement(self) -> Self {
        match self.tag {
            Tag::Zero => Self::exact_one(),
            Tag::One => Self::exact_zero(),
            Tag::Half => self,
            Tag::General => Self { value: 1.0 - self.value, tag: Tag::General },
        }
    }

    /// The crossover of the XOR of two independent error events:
    /// `e1 * (1 - e2) + (1 - e1) * e2`.
    ///
    /// The result is exactly `1/2` as soon as either input is, and exactly
    /// `0` (resp. `1`) when the inputs are equal (resp. opposite) exact
    /// endpoints; those cases are resolved by flag, not by arithmetic.
    pub fn star(self, other: Self) -> Self {
        use Tag::*;
        match (self.tag, other.tag) {
            (Half, _) | (_, Half) => Self::exact_half(),
            (Zero, Zero) | (One, One) => Self::exact_zero(),
            (Zero, One) | (One, Zero) => Self::exact_one(),
            (Zero, General) => other,
            (General, Zero) => self,
            (One, General) => Self { value: 1.0 - other.value, tag: General },
            (General, One) => Self { value: 1.0 - self.value, tag: General },
            (General, General) => {
                let v = self.value * (1.0 - other.value) + (1.0 - self.value) * other.value;
                Self { value: v.clamp(0.0, 1.0), tag: General }
            }
        }
    }
}

/// One weighted BSC component of a mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    mass: f64,
    crossover: CrossoverProb,
}

impl Component {
    /// Probability that this component is the one used.
    pub fn mass(self) -> f64 {
        self.mass
    }

    /// Crossover probability of this component.
    pub fn crossover(self) -> CrossoverProb {
        self.crossover
    }
}

/// How far a mixture's component list has been normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// Components as given; crossovers may exceed `1/2`.
    Raw,
    /// Every crossover folded into `[0, 1/2]`.
    Natural,
    /// Natural, sorted strictly increasing, duplicates merged.
    Canonical,
}

/// Scalar parameters of a BMS channel, read off its canonical decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Mutual information `I(W)` under uniform input, in bits.
    pub capacity: f64,
    /// Bhattacharyya parameter `Z(W)`.
    pub bhattacharyya: f64,
    /// Mass of the exact-zero component; the largest rate at which erasure
    /// decoding can run with no undetected errors.
    pub zero_error_capacity: f64,
    /// Smallest positive crossover carrying mass ("best imperfect
    /// component"); `0` iff the channel is perfect.
    pub best_imperfect: f64,
}

/// A received symbol of a mixture channel: which BSC was used, and the bit it
/// delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    /// Index of the component in the canonical decomposition.
    pub component: usize,
    /// The observed output bit.
    pub bit: u8,
}

/// A BMS channel as a weighted list of BSC crossover probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct BscMixture {
    components: Vec<Component>,
    form: Form,
}

#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum
    }
}

/// Binary entropy in bits, exact at the endpoints.
fn binary_entropy(e: f64) -> f64 {
    if e <= 0.0 || e >= 1.0 {
        0.0
    } else {
        -(e * e.log2() + (1.0 - e) * (1.0 - e).log2())
    }
}

impl BscMixture {
    /// Builds a mixture from `(mass, crossover)` pairs.
    ///
    /// Masses must be positive and sum to one within `1e-12`.
    pub fn new(components: Vec<(f64, CrossoverProb)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidChannelDocument("empty mixture".into()));
        }
        let mut total = Kahan::default();
        for &(mass, _) in &components {
            if !mass.is_finite() || mass <= 0.0 {
                return Err(Error::InvalidMass(mass));
            }
            total.add(mass);
        }
        if (total.value() - 1.0).abs() > 1e-12 {
            return Err(Error::MassNotNormalized(total.value()));
        }
        Ok(Self {
            components: components
                .into_iter()
                .map(|(mass, crossover)| Component { mass, crossover })
                .collect(),
            form: Form::Raw,
        })
    }

    /// The binary symmetric channel `BSC(e)` as a one-component mixture.
    pub fn bsc(e: f64) -> Result<Self> {
        let crossover = CrossoverProb::new(e)?;
        Ok(Self {
            components: vec![Component { mass: 1.0, crossover }],
            form: Form::Raw,
        })
    }

    /// The binary erasure channel `BEC(e)`: a clean component of mass
    /// `1 - e` and a pure-noise component of mass `e`.
    pub fn bec(e: f64) -> Result<Self> {
        if !e.is_finite() || !(0.0..=1.0).contains(&e) {
            return Err(Error::InvalidProbability(e));
        }
        let mut components = Vec::new();
        if e < 1.0 {
            components.push(Component { mass: 1.0 - e, crossover: CrossoverProb::exact_zero() });
        }
        if e > 0.0 {
            components.push(Component { mass: e, crossover: CrossoverProb::exact_half() });
        }
        Ok(Self { components, form: Form::Canonical })
    }

    fn from_parts(components: Vec<Component>, form: Form) -> Self {
        Self { components, form }
    }

    /// The component list in the mixture's current form.
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Current normalization level of the component list.
    pub fn form(&self) -> Form {
        self.form
    }

    /// Number of components.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// True iff the mixture has no components (never the case for a valid
    /// channel).
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// The canonical decomposition at default tolerance, borrowing when the
    /// mixture is already canonical.
    fn canonical_view(&self) -> Cow<'_, Self> {
        if self.form == Form::Canonical {
            Cow::Borrowed(self)
        } else {
            Cow::Owned(self.canonicalize(DEFAULT_MERGE_TOL))
        }
    }

    /// Folds every crossover into `[0, 1/2]`, leaving masses untouched.
    pub fn naturalize(&self) -> Self {
        if self.form != Form::Raw {
            return self.clone();
        }
        let components = self
            .components
            .iter()
            .map(|c| {
                let folded = c.crossover.folded();
                let crossover = match folded.tag {
                    Tag::General => CrossoverProb::general_open(folded.value),
                    _ => folded,
                };
                Component { mass: c.mass, crossover }
            })
            .collect();
        Self::from_parts(components, Form::Natural)
    }

    /// Reduces the mixture to its canonical decomposition: naturalized,
    /// sorted by increasing crossover, zero-mass components dropped, and
    /// components closer than `merge_tol` merged into their mass-weighted
    /// average. Flagged components only ever merge with identically flagged
    /// ones, whatever the tolerance.
    pub fn canonicalize(&self, merge_tol: f64) -> Self {
        let natural = self.naturalize();

        let mut zero_mass = Kahan::default();
        let mut half_mass = Kahan::default();
        let mut general: Vec<(f64, f64)> = Vec::with_capacity(natural.components.len());
        for c in &natural.components {
            if c.mass == 0.0 {
                continue;
            }
            match c.crossover.tag {
                Tag::Zero => zero_mass.add(c.mass),
                Tag::Half => half_mass.add(c.mass),
                Tag::General => general.push((c.crossover.value, c.mass)),
                Tag::One => unreachable!("naturalized mixtures have no One components"),
            }
        }
        general.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut components = Vec::with_capacity(general.len() + 2);
        if zero_mass.value() > 0.0 {
            components.push(Component {
                mass: zero_mass.value(),
                crossover: CrossoverProb::exact_zero(),
            });
        }

        // Greedy left-to-right clustering. A singleton cluster keeps its
        // value bit-for-bit, which makes canonicalization idempotent.
        let mut iter = general.into_iter().peekable();
        while let Some((first_value, first_mass)) = iter.next() {
            let mut mass = Kahan::default();
            let mut weighted = Kahan::default();
            mass.add(first_mass);
            weighted.add(first_value * first_mass);
            let mut mean = first_value;
            let mut count = 1usize;
            while let Some(&(value, _)) = iter.peek() {
                if value - mean <= merge_tol {
                    let (value, m) = iter.next().unwrap();
                    mass.add(m);
                    weighted.add(value * m);
                    mean = weighted.value() / mass.value();
                    count += 1;
                } else {
                    break;
                }
            }
            let value = if count == 1 { first_value } else { mean };
            components.push(Component {
                mass: mass.value(),
                crossover: CrossoverProb::general_open(value),
            });
        }

        if half_mass.value() > 0.0 {
            components.push(Component {
                mass: half_mass.value(),
                crossover: CrossoverProb::exact_half(),
            });
        }
        Self::from_parts(components, Form::Canonical)
    }

    /// Mass of the component at crossover `eps` in the canonical form.
    ///
    /// Flagged values match by flag alone; unflagged values match within the
    /// default merge tolerance.
    pub fn mass_at(&self, eps: CrossoverProb) -> f64 {
        let canonical = self.canonical_view();
        let query = eps.folded();
        let mut total = Kahan::default();
        for c in &canonical.components {
            let matches = match (query.tag, c.crossover.tag) {
                (Tag::Zero, Tag::Zero) | (Tag::Half, Tag::Half) => true,
                (Tag::General, Tag::General) => {
                    (c.crossover.value - query.value).abs() <= DEFAULT_MERGE_TOL
                }
                _ => false,
            };
            if matches {
                total.add(c.mass);
            }
        }
        total.value()
    }

    /// Capacity, Bhattacharyya parameter, zero-error capacity and best
    /// imperfect component, all in one canonical pass.
    pub fn params(&self) -> ChannelParams {
        let canonical = self.canonical_view();
        let mut capacity = Kahan::default();
        let mut bhattacharyya = Kahan::default();
        let mut zero_error = 0.0;
        let mut best_imperfect: Option<f64> = None;
        let mut all_perfect = true;
        for c in &canonical.components {
            let e = c.crossover.value;
            capacity.add(c.mass * (1.0 - binary_entropy(e)));
            bhattacharyya.add(c.mass * 2.0 * (e * (1.0 - e)).sqrt());
            if c.crossover.is_exact_zero() {
                zero_error = c.mass;
            } else {
                all_perfect = false;
                if best_imperfect.is_none() {
                    best_imperfect = Some(e);
                }
            }
        }
        ChannelParams {
            capacity: capacity.value(),
            bhattacharyya: bhattacharyya.value(),
            zero_error_capacity: zero_error,
            best_imperfect: if all_perfect { 0.0 } else { best_imperfect.unwrap() },
        }
    }

    /// Likelihood `W(obs | input)` of one observation.
    pub fn likelihood(&self, obs: Observation, input: u8) -> Result<f64> {
        let canonical = self.canonical_view();
        let c = canonical
            .components
            .get(obs.component)
            .copied()
            .ok_or(Error::UnknownComponent {
                component: obs.component,
                count: canonical.components.len(),
            })?;
        let flip = c.crossover.value;
        Ok(if obs.bit == input { c.mass * (1.0 - flip) } else { c.mass * flip })
    }

    /// The check-node (minus) polarization transform: every ordered pair of
    /// components combines into one at the XOR of their crossovers.
    pub fn transform_minus(&self) -> Self {
        let w = self.canonical_view();
        let mut out = Vec::with_capacity(w.components.len() * w.components.len());
        for a in &w.components {
            for b in &w.components {
                out.push(Component {
                    mass: a.mass * b.mass,
                    crossover: a.crossover.star(b.crossover),
                });
            }
        }
        Self::from_parts(out, Form::Raw).canonicalize(DEFAULT_MERGE_TOL)
    }

    /// The variable-node (plus) polarization transform: every ordered pair of
    /// components splits into two, one for each value of the XOR side
    /// information. Pair terms whose mass factor vanishes are dropped, with
    /// `0/0` read as a clean crossover.
    pub fn transform_plus(&self) -> Self {
        let w = self.canonical_view();
        let comps = &w.components;
        let mut out = Vec::with_capacity(2 * comps.len() * comps.len());
        for (i, a) in comps.iter().enumerate() {
            for (j, b) in comps.iter().enumerate() {
                let base = a.mass * b.mass;
                match (a.crossover.tag, b.crossover.tag) {
                    // A clean side collapses both terms onto a clean output.
                    (Tag::Zero, _) | (_, Tag::Zero) => {
                        out.push(Component { mass: base, crossover: CrossoverProb::exact_zero() });
                    }
                    (Tag::Half, Tag::Half) => {
                        out.push(Component { mass: base, crossover: CrossoverProb::exact_half() });
                    }
                    // A pure-noise side leaves the other crossover unchanged
                    // in both terms.
                    (Tag::Half, Tag::General) => {
                        out.push(Component { mass: base, crossover: b.crossover });
                    }
                    (Tag::General, Tag::Half) => {
                        out.push(Component { mass: base, crossover: a.crossover });
                    }
                    (Tag::General, Tag::General) => {
                        let g1 = a.crossover.value;
                        let g2 = b.crossover.value;
                        let p01 = g1 * (1.0 - g2);
                        let p10 = (1.0 - g1) * g2;
                        let p11 = g1 * g2;
                        let mass_odd = p01 + p10;
                        let mass_even = 1.0 - mass_odd;
                        if i == j {
                            // Same component twice: the odd term sits at
                            // exactly 1/2.
                            out.push(Component {
                                mass: base * mass_odd,
                                crossover: CrossoverProb::exact_half(),
                            });
                        } else {
                            // Fold without cancellation: the complement of
                            // p01/mass_odd is p10/mass_odd.
                            out.push(Component {
                                mass: base * mass_odd,
                                crossover: CrossoverProb::general_open(p01.min(p10) / mass_odd),
                            });
                        }
                        out.push(Component {
                            mass: base * mass_even,
                            crossover: CrossoverProb::general_open(p11 / mass_even),
                        });
                    }
                    _ => unreachable!("canonical mixtures contain no One components"),
                }
            }
        }
        out.retain(|c| c.mass > 0.0);
        Self::from_parts(out, Form::Raw).canonicalize(DEFAULT_MERGE_TOL)
    }

    /// Merges unflagged components, smallest capacity loss first, until at
    /// most `l_max` components remain. Flagged components are never touched,
    /// so the result can exceed `l_max` by their count. Merging is a
    /// channel degradation, hence the reported parameters only get worse.
    pub fn degrade(&self, l_max: usize) -> Self {
        let w = self.canonical_view();
        if w.components.len() <= l_max {
            return w.into_owned();
        }

        let mut flagged_low: Option<Component> = None;
        let mut flagged_high: Option<Component> = None;
        let mut nodes: Vec<Option<(f64, f64)>> = Vec::new(); // (mass, value)
        for c in &w.components {
            match c.crossover.tag {
                Tag::Zero => flagged_low = Some(*c),
                Tag::Half => flagged_high = Some(*c),
                _ => nodes.push(Some((c.mass, c.crossover.value))),
            }
        }
        let flag_count = flagged_low.iter().count() + flagged_high.iter().count();
        let target = l_max.saturating_sub(flag_count).max(1);

        let merge_loss = |a: (f64, f64), b: (f64, f64)| -> f64 {
            let mass = a.0 + b.0;
            let mean = (a.0 * a.1 + b.0 * b.1) / mass;
            let loss = mass * binary_entropy(mean) - a.0 * binary_entropy(a.1)
                - b.0 * binary_entropy(b.1);
            loss.max(0.0)
        };

        let n = nodes.len();
        let mut next: Vec<usize> = (1..=n).collect();
        let mut prev: Vec<usize> = (0..n).map(|i| i.wrapping_sub(1)).collect();
        let mut stamp = vec![0u64; n];
        let mut alive = n;

        // Min-heap keyed on the capacity loss of merging node i with its
        // right neighbor; non-negative f64 bits order correctly as u64.
        let mut heap: BinaryHeap<Reverse<(u64, usize, u64, u64)>> = BinaryHeap::new();
        let push_pair = |heap: &mut BinaryHeap<_>,
                             nodes: &Vec<Option<(f64, f64)>>,
                             stamp: &Vec<u64>,
                             i: usize,
                             j: usize| {
            if let (Some(a), Some(b)) = (nodes[i], nodes[j]) {
                let loss = merge_loss(a, b);
                heap.push(Reverse((loss.to_bits(), i, stamp[i], stamp[j])));
            }
        };
        for i in 0..n.saturating_sub(1) {
            push_pair(&mut heap, &nodes, &stamp, i, i + 1);
        }

        while alive > target {
            let Reverse((_, i, si, sj)) = match heap.pop() {
                Some(entry) => entry,
                None => break,
            };
            let j = next[i];
            if j >= n || nodes[i].is_none() || nodes[j].is_none() {
                continue;
            }
            if stamp[i] != si || stamp[j] != sj {
                continue;
            }
            let a = nodes[i].unwrap();
            let b = nodes[j].unwrap();
            let mass = a.0 + b.0;
            let mean = (a.0 * a.1 + b.0 * b.1) / mass;
            nodes[i] = Some((mass, mean));
            nodes[j] = None;
            stamp[i] += 1;
            next[i] = next[j];
            if next[j] < n {
                prev[next[j]] = i;
            }
            alive -= 1;
            if prev[i] < n {
                push_pair(&mut heap, &nodes, &stamp, prev[i], i);
            }
            if next[i] < n {
                push_pair(&mut heap, &nodes, &stamp, i, next[i]);
            }
        }

        let mut components = Vec::with_capacity(alive + flag_count);
        if let Some(c) = flagged_low {
            components.push(c);
        }
        components.extend(nodes.into_iter().flatten().map(|(mass, value)| Component {
            mass,
            crossover: CrossoverProb::general_open(value),
        }));
        if let Some(c) = flagged_high {
            components.push(c);
        }
        Self::from_parts(components, Form::Raw).canonicalize(DEFAULT_MERGE_TOL)
    }

    /// The synthetic channel reached by applying the transforms named in
    /// `signs`, degrading to at most `l_max` components after every step.
    pub fn synthesize(&self, signs: &SignSequence, l_max: usize) -> Self {
        assert!(l_max >= 2, "l_max must be at least 2");
        let mut w = self.canonicalize(DEFAULT_MERGE_TOL);
        for sign in signs.signs() {
            w = match sign {
                Sign::Minus => w.transform_minus(),
                Sign::Plus => w.transform_plus(),
            };
            if w.len() > l_max {
                w = w.degrade(l_max);
            }
        }
        w
    }
}

/// JSON channel description: exactly one of a BEC, a BSC, or an explicit
/// mixture. Crossover values written as `0` or `0.5` parse into flagged
/// components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bsc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixture: Option<Vec<ComponentDoc>>,
}

/// One `{"p": ..., "eps": ...}` entry of a mixture document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentDoc {
    pub p: f64,
    pub eps: f64,
}

impl ChannelDoc {
    /// Wraps a BEC parameter.
    pub fn from_bec(e: f64) -> Self {
        Self { bec: Some(e), bsc: None, mixture: None }
    }

    /// Wraps a BSC parameter.
    pub fn from_bsc(e: f64) -> Self {
        Self { bec: None, bsc: Some(e), mixture: None }
    }

    /// Records a mixture componentwise.
    pub fn from_mixture(w: &BscMixture) -> Self {
        let mixture = w
            .components()
            .iter()
            .map(|c| ComponentDoc { p: c.mass(), eps: c.crossover().value() })
            .collect();
        Self { bec: None, bsc: None, mixture: Some(mixture) }
    }

    /// Parses a document from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidChannelDocument(e.to_string()))
    }

    /// Builds the described channel.
    pub fn to_mixture(&self) -> Result<BscMixture> {
        let given =
            self.bec.is_some() as usize + self.bsc.is_some() as usize + self.mixture.is_some() as usize;
        if given != 1 {
            return Err(Error::InvalidChannelDocument(
                "expected exactly one of \"bec\", \"bsc\", \"mixture\"".into(),
            ));
        }
        if let Some(e) = self.bec {
            return BscMixture::bec(e);
        }
        if let Some(e) = self.bsc {
            return BscMixture::bsc(e);
        }
        let components = self
            .mixture
            .as_ref()
            .unwrap()
            .iter()
            .map(|c| Ok((c.p, CrossoverProb::new(c.eps)?)))
            .collect::<Result<Vec<_>>>()?;
        BscMixture::new(components)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(v: f64) -> CrossoverProb {
        CrossoverProb::new(v).unwrap()
    }

    fn mixture(parts: &[(f64, f64)]) -> BscMixture {
        BscMixture::new(parts.iter().map(|&(p, e)| (p, cp(e))).collect()).unwrap()
    }

    #[test]
    fn star_half_absorbs() {
        for x in [0.0, 0.1, 0.49, 0.5, 0.9, 1.0] {
            let r = cp(0.5).star(cp(x));
            assert_eq!(r.value(), 0.5);
            assert!(r.is_exact_half());
        }
    }

    #[test]
    fn star_zero_cases() {
        let r = cp(0.0).star(cp(0.0));
        assert_eq!(r.value(), 0.0);
        assert!(r.is_exact_zero());
        assert!(cp(1.0).star(cp(1.0)).is_exact_zero());
        // 0 * x copies x exactly
        assert_eq!(cp(0.0).star(cp(0.3)).value(), 0.3);
    }

    #[test]
    fn star_direct_evaluation() {
        assert!((cp(0.25).star(cp(0.25)).value() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn folded_examples() {
        assert!((cp(0.9).folded().value() - 0.1).abs() < 1e-15);
        assert!(cp(0.5).folded().is_exact_half());
        assert!(cp(0.0).folded().is_exact_zero());
        assert!(cp(1.0).folded().is_exact_zero());
    }

    #[test]
    fn bec_decomposition() {
        let w = BscMixture::bec(0.3).unwrap();
        let c = w.components();
        assert_eq!(c.len(), 2);
        assert!((c[0].mass() - 0.7).abs() < 1e-15);
        assert!(c[0].crossover().is_exact_zero());
        assert!((c[1].mass() - 0.3).abs() < 1e-15);
        assert!(c[1].crossover().is_exact_half());

        let perfect = BscMixture::bec(0.0).unwrap();
        assert_eq!(perfect.len(), 1);
        assert!(perfect.components()[0].crossover().is_exact_zero());

        let bsc = BscMixture::bsc(0.11).unwrap();
        assert_eq!(bsc.len(), 1);
        assert!((bsc.components()[0].crossover().value() - 0.11).abs() < 1e-15);
    }

    #[test]
    fn naturalize_folds_and_preserves_flags() {
        let w = mixture(&[(0.5, 0.9), (0.5, 0.1)]).naturalize();
        assert!((w.components()[0].crossover().value() - 0.1).abs() < 1e-15);
        assert!((w.components()[1].crossover().value() - 0.1).abs() < 1e-15);

        let noise = mixture(&[(1.0, 0.5)]).naturalize();
        assert!(noise.components()[0].crossover().is_exact_half());

        let w = mixture(&[(0.3, 1.0), (0.7, 0.2)]).naturalize();
        assert!(w.components()[0].crossover().is_exact_zero());
        assert_eq!(w.components()[0].crossover().value(), 0.0);
        assert!((w.components()[1].crossover().value() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn canonicalize_merges_complements() {
        let w = mixture(&[(0.4, 0.2), (0.6, 0.8)]).canonicalize(DEFAULT_MERGE_TOL);
        assert_eq!(w.len(), 1);
        assert!((w.components()[0].mass() - 1.0).abs() < 1e-15);
        assert!((w.components()[0].crossover().value() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn canonicalize_is_idempotent_on_bec() {
        let w = BscMixture::bec(0.3).unwrap();
        let once = w.canonicalize(DEFAULT_MERGE_TOL);
        let twice = once.canonicalize(DEFAULT_MERGE_TOL);
        assert_eq!(once, twice);
    }

    #[test]
    fn exact_zero_never_merges_with_positive() {
        let w = mixture(&[(0.5, 0.0), (0.5, 1e-15)]).canonicalize(1e-12);
        assert_eq!(w.len(), 2);
        assert!(w.components()[0].crossover().is_exact_zero());
        assert!(w.components()[1].crossover().value() > 0.0);
        assert!((w.components()[0].mass() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mass_at_examples() {
        let bec = BscMixture::bec(0.3).unwrap();
        assert!((bec.mass_at(CrossoverProb::exact_zero()) - 0.7).abs() < 1e-15);
        assert!((bec.mass_at(cp(0.25)) - 0.0).abs() < 1e-15);
        let bsc = BscMixture::bsc(0.11).unwrap();
        assert!((bsc.mass_at(cp(0.11)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn params_examples() {
        let p = BscMixture::bec(0.3).unwrap().params();
        assert!((p.zero_error_capacity - 0.7).abs() < 1e-15);
        assert!((p.best_imperfect - 0.5).abs() < 1e-15);
        assert!((p.capacity - 0.7).abs() < 1e-12);
        assert!((p.bhattacharyya - 0.3).abs() < 1e-12);

        let p = BscMixture::bsc(0.11).unwrap().params();
        assert!((p.zero_error_capacity - 0.0).abs() < 1e-15);
        assert!((p.best_imperfect - 0.11).abs() < 1e-15);

        let p = BscMixture::bec(0.0).unwrap().params();
        assert!((p.zero_error_capacity - 1.0).abs() < 1e-15);
        assert_eq!(p.best_imperfect, 0.0);
        assert!((p.capacity - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minus_transform_on_bec_and_bsc() {
        let w = BscMixture::bec(0.5).unwrap().transform_minus();
        let expect = BscMixture::bec(0.75).unwrap();
        assert_eq!(w.len(), 2);
        assert!((w.components()[0].mass() - expect.components()[0].mass()).abs() < 1e-15);
        assert!((w.components()[1].mass() - expect.components()[1].mass()).abs() < 1e-15);
        assert!(w.components()[1].crossover().is_exact_half());

        let w = BscMixture::bsc(0.25).unwrap().transform_minus();
        assert_eq!(w.len(), 1);
        assert!((w.components()[0].crossover().value() - 0.375).abs() < 1e-15);

        let w = BscMixture::bec(0.0).unwrap().transform_minus();
        assert_eq!(w.len(), 1);
        assert!(w.components()[0].crossover().is_exact_zero());
    }

    #[test]
    fn plus_transform_on_bec_and_bsc() {
        let w = BscMixture::bec(0.5).unwrap().transform_plus();
        assert_eq!(w.len(), 2);
        assert!((w.components()[0].mass() - 0.75).abs() < 1e-12);
        assert!(w.components()[0].crossover().is_exact_zero());
        assert!((w.components()[1].mass() - 0.25).abs() < 1e-12);

        let w = BscMixture::bsc(0.25).unwrap().transform_plus();
        assert_eq!(w.len(), 2);
        assert!((w.components()[0].mass() - 0.625).abs() < 1e-15);
        assert!((w.components()[0].crossover().value() - 0.1).abs() < 1e-15);
        assert!((w.components()[1].mass() - 0.375).abs() < 1e-15);
        assert!(w.components()[1].crossover().is_exact_half());
        assert!((w.components()[1].crossover().value() - 0.5).abs() < 1e-15);

        let w = BscMixture::bec(0.0).unwrap().transform_plus();
        assert_eq!(w.len(), 1);
        assert!(w.components()[0].crossover().is_exact_zero());
    }

    #[test]
    fn synthesize_follows_sign_order() {
        let w = BscMixture::bec(0.5).unwrap();
        let pp = w.synthesize(&SignSequence::new(vec![Sign::Plus, Sign::Plus]), DEFAULT_L_MAX);
        assert!((pp.mass_at(CrossoverProb::exact_half()) - 0.0625).abs() < 1e-12);

        let id = w.synthesize(&SignSequence::new(vec![]), DEFAULT_L_MAX);
        assert_eq!(id, w.canonicalize(DEFAULT_MERGE_TOL));

        let mp = w.synthesize(&SignSequence::new(vec![Sign::Minus, Sign::Plus]), DEFAULT_L_MAX);
        assert!((mp.mass_at(CrossoverProb::exact_half()) - 0.5625).abs() < 1e-12);
    }

    #[test]
    fn degrade_keeps_flags_and_mass() {
        let mut parts = vec![(0.2, 0.0), (0.2, 0.5)];
        for k in 0..12 {
            parts.push((0.05, 0.05 + 0.03 * k as f64));
        }
        let w = mixture(&parts).degrade(6);
        assert!(w.len() <= 6);
        assert!(w.components()[0].crossover().is_exact_zero());
        assert!((w.components()[0].mass() - 0.2).abs() < 1e-12);
        assert!(w.components().last().unwrap().crossover().is_exact_half());
        let total: f64 = w.components().iter().map(|c| c.mass()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // degrading only lowers capacity
        assert!(w.params().capacity <= mixture(&parts).params().capacity + 1e-12);
    }

    #[test]
    fn channel_doc_round_trip() {
        let doc = ChannelDoc::from_json(r#"{"mixture":[{"p":0.5,"eps":0.0},{"p":0.5,"eps":0.25}]}"#)
            .unwrap();
        let w = doc.to_mixture().unwrap();
        assert!(w.components()[0].crossover().is_exact_zero());

        let err = ChannelDoc::from_json(r#"{"bec":0.5,"bsc":0.1}"#).unwrap().to_mixture();
        assert!(err.is_err());

        let bec = ChannelDoc::from_bec(0.3).to_mixture().unwrap();
        assert_eq!(bec, BscMixture::bec(0.3).unwrap());
    }

    #[test]
    fn decomposition_independence_under_split_and_complement() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let l = rng.gen_range(1..=5);
            let mut masses: Vec<f64> = (0..l).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = masses.iter().sum();
            for m in &mut masses {
                *m /= total;
            }
            let eps: Vec<f64> = (0..l)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        0.0
                    } else if rng.gen_bool(0.2) {
                        0.5
                    } else {
                        rng.gen_range(0.01..0.49)
                    }
                })
                .collect();
            let base =
                BscMixture::new(masses.iter().zip(&eps).map(|(&p, &e)| (p, cp(e))).collect())
                    .unwrap();

            // Split every component in two and complement half of them.
            let mut perturbed = Vec::new();
            for (&p, &e) in masses.iter().zip(&eps) {
                let f = rng.gen_range(0.2..0.8);
                perturbed.push((p * f, cp(e)));
                let other = if rng.gen_bool(0.5) { cp(e).complement() } else { cp(e) };
                perturbed.push((p - p * f, other));
            }
            let alt = BscMixture::new(perturbed).unwrap();

            let a = base.params();
            let b = alt.params();
            assert!((a.zero_error_capacity - b.zero_error_capacity).abs() < 1e-12);
            assert!((a.best_imperfect - b.best_imperfect).abs() < 1e-12);
            assert!((a.capacity - b.capacity).abs() < 1e-12);
            assert!((a.bhattacharyya - b.bhattacharyya).abs() < 1e-12);
            for &e in &eps {
                let q = cp(e);
                assert!((base.mass_at(q) - alt.mass_at(q)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn evolution_identities_on_random_mixtures() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let l = rng.gen_range(1..=6);
            let mut parts: Vec<(f64, f64)> = Vec::new();
            for _ in 0..l {
                let e = if rng.gen_bool(0.3) {
                    0.0
                } else if rng.gen_bool(0.2) {
                    0.5
                } else {
                    rng.gen_range(0.01..0.49)
                };
                parts.push((rng.gen_range(0.05..1.0), e));
            }
            let total: f64 = parts.iter().map(|p| p.0).sum();
            for p in &mut parts {
                p.0 /= total;
            }
            let w = mixture(&parts).canonicalize(DEFAULT_MERGE_TOL);
            let p = w.params();
            let minus = w.transform_minus().params();
            let plus = w.transform_plus().params();

            let i0 = p.zero_error_capacity;
            assert!((minus.zero_error_capacity - i0 * i0).abs() < 1e-12);
            assert!((plus.zero_error_capacity - (2.0 * i0 - i0 * i0)).abs() < 1e-12);
            assert!(
                (minus.zero_error_capacity + plus.zero_error_capacity - 2.0 * i0).abs() < 1e-12
            );

            let e = p.best_imperfect;
            let expect_minus = if i0 == 0.0 { 2.0 * e * (1.0 - e) } else { e };
            assert!((minus.best_imperfect - expect_minus).abs() < 1e-12);
            let expect_plus = if e == 0.0 { 0.0 } else { e * e / (e * e + (1.0 - e) * (1.0 - e)) };
            assert!((plus.best_imperfect - expect_plus).abs() < 1e-12);

            assert!(minus.best_imperfect >= e - 1e-12);
            assert!(plus.best_imperfect >= e * e - 1e-12);

            assert!((minus.capacity + plus.capacity - 2.0 * p.capacity).abs() < 1e-10);
        }
    }
}
