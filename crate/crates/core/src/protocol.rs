//! The semi-counterfactual Zeno chain and the nested (chained Zeno) protocol.
//!
//! Each protocol can be run two ways:
//!
//! * exactly, by propagating one sub-normalized state through every beam
//!   splitter and shutter. Each shutter has a single surviving branch, so the
//!   whole terminal distribution costs `O(M N)` small matrix products;
//! * as single-photon Monte Carlo trials, where every shutter interrogation is
//!   sampled and the photon either survives (collapsed, renormalized) or is
//!   lost on the spot.
//!
//! Detectors are path-indexed: `D0` clicks when the photon leaves on path 0,
//! `D1` on path 1. Which detector means which bit depends on the protocol
//! and lives in [`correct_detector`] / [`decode`].

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::quantum::{apply, project_out, sample_shutter, trial_rng, PathState, Unitary};
use crate::scalar::{quarter_turn_cos_sin, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    /// Single chain of `N` splitters; counterfactual for bit 1 only.
    Semi,
    /// `M` outer cycles each holding an `N`-stage inner chain.
    Nested,
}

/// How Alice handles the bit-0 erasure branch of the nested protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The in-channel photon ends at a detector only Bob sees.
    Original,
    /// Alice's shutter sits in the last inner cycle of every outer cycle
    /// regardless of the bit, so she also learns about the erasure.
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Bit {
    Zero,
    One,
}

impl From<Bit> for u8 {
    fn from(bit: Bit) -> u8 {
        match bit {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }
}

impl TryFrom<u8> for Bit {
    type Error = Error;

    fn try_from(v: u8) -> Result<Bit> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            other => Err(Error::invalid("bit", format!("{other} is not 0 or 1"))),
        }
    }
}

impl std::fmt::Display for Bit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub kind: ProtocolKind,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub bit: Bit,
    pub variant: Variant,
}

impl ProtocolParams {
    /// Semi-counterfactual chain. `M` is fixed at 1 and the variant at
    /// `Original`, neither has a meaning here.
    pub fn semi(n: u64, bit: Bit) -> Result<Self> {
        analytic::check_cycles("N", n)?;
        Ok(Self {
            kind: ProtocolKind::Semi,
            m: 1,
            n,
            bit,
            variant: Variant::Original,
        })
    }

    pub fn nested(m: u64, n: u64, bit: Bit, variant: Variant) -> Result<Self> {
        analytic::check_cycles("M", m)?;
        analytic::check_cycles("N", n)?;
        Ok(Self {
            kind: ProtocolKind::Nested,
            m,
            n,
            bit,
            variant,
        })
    }

    pub fn new(kind: ProtocolKind, m: u64, n: u64, bit: Bit, variant: Variant) -> Result<Self> {
        match kind {
            ProtocolKind::Semi => Self::semi(n, bit),
            ProtocolKind::Nested => Self::nested(m, n, bit, variant),
        }
    }

    /// Shutter interrogations along a successful trajectory.
    pub fn success_frequency(&self) -> u64 {
        match (self.kind, self.bit) {
            (ProtocolKind::Semi, Bit::Zero) => 0,
            (ProtocolKind::Semi, Bit::One) => self.n,
            (ProtocolKind::Nested, Bit::Zero) => self.m,
            (ProtocolKind::Nested, Bit::One) => self.m * self.n,
        }
    }

    /// The terminal event recorded when the photon is stopped mid-protocol.
    pub fn erasure_event(&self) -> TerminalEvent {
        match (self.kind, self.bit, self.variant) {
            (ProtocolKind::Nested, Bit::Zero, Variant::Original) => TerminalEvent::CHANNEL_DETECTOR,
            _ => TerminalEvent::SHUTTER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventLabel {
    D0,
    D1,
    #[serde(rename = "absorbed_by_shutter")]
    AbsorbedByShutter,
    #[serde(rename = "channel_detector")]
    ChannelDetector,
}

impl EventLabel {
    pub fn detector(path: usize) -> Option<Self> {
        match path {
            0 => Some(EventLabel::D0),
            1 => Some(EventLabel::D1),
            _ => None,
        }
    }

    pub fn is_detector(self) -> bool {
        matches!(self, EventLabel::D0 | EventLabel::D1)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventLabel::D0 => "D0",
            EventLabel::D1 => "D1",
            EventLabel::AbsorbedByShutter => "absorbed_by_shutter",
            EventLabel::ChannelDetector => "channel_detector",
        }
    }
}

/// Who learns that a run was discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErasureKnowledge {
    None,
    BobOnly,
    Both,
}

impl ErasureKnowledge {
    pub fn as_str(self) -> &'static str {
        match self {
            ErasureKnowledge::None => "none",
            ErasureKnowledge::BobOnly => "bob_only",
            ErasureKnowledge::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TerminalEvent {
    pub label: EventLabel,
    pub erasure_known_by: ErasureKnowledge,
}

impl TerminalEvent {
    pub const D0: Self = Self {
        label: EventLabel::D0,
        erasure_known_by: ErasureKnowledge::None,
    };
    pub const D1: Self = Self {
        label: EventLabel::D1,
        erasure_known_by: ErasureKnowledge::None,
    };
    pub const SHUTTER: Self = Self {
        label: EventLabel::AbsorbedByShutter,
        erasure_known_by: ErasureKnowledge::Both,
    };
    pub const CHANNEL_DETECTOR: Self = Self {
        label: EventLabel::ChannelDetector,
        erasure_known_by: ErasureKnowledge::BobOnly,
    };

    pub fn is_erasure(&self) -> bool {
        !self.label.is_detector()
    }
}

/// Detector that reports `bit` when the protocol works.
///
/// The semi chain sends a bit-0 photon across to path 1, while the nested
/// protocol returns a bit-0 photon to path 0.
pub fn correct_detector(kind: ProtocolKind, bit: Bit) -> EventLabel {
    match (kind, bit) {
        (ProtocolKind::Semi, Bit::Zero) | (ProtocolKind::Nested, Bit::One) => EventLabel::D1,
        (ProtocolKind::Semi, Bit::One) | (ProtocolKind::Nested, Bit::Zero) => EventLabel::D0,
    }
}

/// Bob's reading of a detector click; `None` for erasures.
pub fn decode(kind: ProtocolKind, label: EventLabel) -> Option<Bit> {
    [Bit::Zero, Bit::One]
        .into_iter()
        .find(|&bit| label.is_detector() && correct_detector(kind, bit) == label)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventProbability<T> {
    pub event: TerminalEvent,
    pub probability: T,
}

/// Exact terminal distribution of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution<T> {
    pub params: ProtocolParams,
    pub probs: Vec<EventProbability<T>>,
    /// Measurement frequency along the successful trajectory.
    pub f_success: u64,
    /// Whether a successful photon must have crossed the channel.
    pub channel_presence_on_success: bool,
}

impl<T: Scalar> OutcomeDistribution<T> {
    pub fn event(&self, event: TerminalEvent) -> T {
        self.probs
            .iter()
            .filter(|e| e.event == event)
            .fold(T::zero(), |acc, e| acc + e.probability)
    }

    /// Summed over erasure-knowledge labels.
    pub fn label(&self, label: EventLabel) -> T {
        self.probs
            .iter()
            .filter(|e| e.event.label == label)
            .fold(T::zero(), |acc, e| acc + e.probability)
    }

    pub fn total(&self) -> T {
        self.probs
            .iter()
            .fold(T::zero(), |acc, e| acc + e.probability)
    }

    /// Probability that Bob decodes the sent bit.
    pub fn success(&self) -> T {
        self.label(correct_detector(self.params.kind, self.params.bit))
    }

    /// Probability that the wrong detector clicks.
    pub fn bit_error(&self) -> T {
        self.survival() - self.success()
    }

    pub fn erasure(&self) -> T {
        self.probs
            .iter()
            .filter(|e| e.event.is_erasure())
            .fold(T::zero(), |acc, e| acc + e.probability)
    }

    /// Probability that any detector clicks.
    pub fn survival(&self) -> T {
        self.label(EventLabel::D0) + self.label(EventLabel::D1)
    }

    /// Probability that the photon is found in the transmission channel.
    pub fn channel_presence(&self) -> T {
        if self.channel_presence_on_success {
            T::one()
        } else {
            self.erasure()
        }
    }
}

/// Result of one Monte Carlo photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub event: TerminalEvent,
    /// Shutter interrogations survived, plus the one that stopped the photon.
    pub f: u64,
    pub channel_visits: u64,
    pub seed_index: u64,
}

impl TrialOutcome {
    pub fn is_success(&self, kind: ProtocolKind, bit: Bit) -> bool {
        self.event.label == correct_detector(kind, bit)
    }
}

/// Ready-to-run interferometer with its splitters built once.
#[derive(Debug, Clone, Copy)]
pub struct Interferometer<T> {
    params: ProtocolParams,
    outer: Unitary<T>,
    inner: Unitary<T>,
}

impl<T: Scalar> Interferometer<T> {
    pub fn new(params: ProtocolParams) -> Result<Self> {
        let params =
            ProtocolParams::new(params.kind, params.m, params.n, params.bit, params.variant)?;
        let (outer, inner) = match params.kind {
            ProtocolKind::Semi => {
                let chain = Unitary::beam_splitter(params.n, 2, (0, 1))?;
                (chain, chain)
            }
            ProtocolKind::Nested => (Unitary::outer(params.m)?, Unitary::inner(params.n)?),
        };
        Ok(Self {
            params,
            outer,
            inner,
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    /// Exact terminal distribution by Kraus propagation.
    pub fn exact(&self) -> Result<OutcomeDistribution<T>> {
        let p = &self.params;
        let measure_every_stage = p.bit == Bit::One;
        let mut erased = T::zero();
        let final_state = match p.kind {
            ProtocolKind::Semi => {
                let mut s = PathState::basis(2, 0)?;
                for _ in 0..p.n {
                    s = apply(&self.inner, &s)?;
                    if measure_every_stage {
                        s = shutter_kraus(s, 1, &mut erased)?;
                    }
                }
                s
            }
            ProtocolKind::Nested => {
                let mut s = PathState::basis(3, 0)?;
                'cycles: for _ in 0..p.m {
                    s = apply(&self.outer, &s)?;
                    for _ in 0..p.n {
                        s = apply(&self.inner, &s)?;
                        if measure_every_stage {
                            s = shutter_kraus(s, 2, &mut erased)?;
                            if s.norm2() == T::zero() {
                                break 'cycles;
                            }
                        }
                    }
                    if !measure_every_stage {
                        s = shutter_kraus(s, 2, &mut erased)?;
                    }
                }
                s
            }
        };
        let unit = |x: T| x.max(T::zero()).min(T::one());
        Ok(OutcomeDistribution {
            params: *p,
            probs: vec![
                EventProbability {
                    event: TerminalEvent::D0,
                    probability: unit(final_state.probability(0)),
                },
                EventProbability {
                    event: TerminalEvent::D1,
                    probability: unit(final_state.probability(1)),
                },
                EventProbability {
                    event: p.erasure_event(),
                    probability: unit(erased),
                },
            ],
            f_success: p.success_frequency(),
            channel_presence_on_success: p.kind == ProtocolKind::Semi && p.bit == Bit::Zero,
        })
    }

    /// One sampled photon, reproducible from `(master_seed, trial_index)`.
    pub fn trial(&self, master_seed: u64, trial_index: u64) -> Result<TrialOutcome> {
        let mut rng = trial_rng(master_seed, trial_index);
        self.trial_with(&mut rng, trial_index)
    }

    fn trial_with<R: Rng + ?Sized>(&self, rng: &mut R, seed_index: u64) -> Result<TrialOutcome> {
        let p = &self.params;
        let measure_every_stage = p.bit == Bit::One;
        let mut f = 0;
        let stopped = |f| TrialOutcome {
            event: p.erasure_event(),
            f,
            channel_visits: 1,
            seed_index,
        };
        let (state, channel_visits) = match p.kind {
            ProtocolKind::Semi => {
                let mut s = PathState::basis(2, 0)?;
                for _ in 0..p.n {
                    s = apply(&self.inner, &s)?;
                    if measure_every_stage {
                        f += 1;
                        let (record, next) = sample_shutter(&s, 1, rng)?;
                        if record.absorbed {
                            return Ok(stopped(f));
                        }
                        s = next;
                    }
                }
                // Without the shutter the photon crosses the channel on its way to D1.
                (s, u64::from(!measure_every_stage))
            }
            ProtocolKind::Nested => {
                let mut s = PathState::basis(3, 0)?;
                for _ in 0..p.m {
                    s = apply(&self.outer, &s)?;
                    for _ in 0..p.n {
                        s = apply(&self.inner, &s)?;
                        if measure_every_stage {
                            f += 1;
                            let (record, next) = sample_shutter(&s, 2, rng)?;
                            if record.absorbed {
                                return Ok(stopped(f));
                            }
                            s = next;
                        }
                    }
                    if !measure_every_stage {
                        f += 1;
                        let (record, next) = sample_shutter(&s, 2, rng)?;
                        if record.absorbed {
                            return Ok(stopped(f));
                        }
                        s = next;
                    }
                }
                (s, 0)
            }
        };
        let p0 = state.probability(0).as_f64();
        let p1 = state.probability(1).as_f64();
        let u = rng.random::<f64>() * (p0 + p1);
        let event = if u < p0 {
            TerminalEvent::D0
        } else {
            TerminalEvent::D1
        };
        Ok(TrialOutcome {
            event,
            f,
            channel_visits,
            seed_index,
        })
    }
}

fn kraus_floor<T: Scalar>() -> T {
    T::of(1e-300).max(T::min_positive_value())
}

/// Shutter on `blocked` in Kraus form; absorbed weight is added to `erased`.
/// A trajectory whose surviving weight underflows the floor is absorbed whole.
fn shutter_kraus<T: Scalar>(
    s: PathState<T>,
    blocked: usize,
    erased: &mut T,
) -> Result<PathState<T>> {
    let hit = s.probability(blocked);
    let (kept, _) = project_out(&s, blocked)?;
    *erased = *erased + hit;
    let left = kept.norm2();
    if left > T::zero() && left < kraus_floor() {
        *erased = *erased + left;
        return PathState::from_real(&vec![T::zero(); s.dim()]);
    }
    Ok(kept)
}

pub fn run_semi_exact<T: Scalar>(n: u64, bit: Bit) -> Result<OutcomeDistribution<T>> {
    Interferometer::new(ProtocolParams::semi(n, bit)?)?.exact()
}

pub fn run_nested_exact<T: Scalar>(
    m: u64,
    n: u64,
    bit: Bit,
    variant: Variant,
) -> Result<OutcomeDistribution<T>> {
    Interferometer::new(ProtocolParams::nested(m, n, bit, variant)?)?.exact()
}

pub fn run_exact<T: Scalar>(params: ProtocolParams) -> Result<OutcomeDistribution<T>> {
    Interferometer::new(params)?.exact()
}

pub fn run_trial_mc<T: Scalar>(
    params: ProtocolParams,
    master_seed: u64,
    trial_index: u64,
) -> Result<TrialOutcome> {
    Interferometer::<T>::new(params)?.trial(master_seed, trial_index)
}

/// Success probability predicted by the closed forms for this run.
///
/// For the nested protocol these are `lambda0(M)` and `lambda1(M, N)`; the
/// semi chain succeeds with `cos^(2N)(pi / 2N)` for bit 1 and always for bit 0.
pub fn analytic_success<T: Scalar>(params: &ProtocolParams) -> Result<T> {
    match (params.kind, params.bit) {
        (ProtocolKind::Nested, Bit::Zero) => analytic::lambda0(params.m),
        (ProtocolKind::Nested, Bit::One) => analytic::lambda1(params.m, params.n),
        (ProtocolKind::Semi, Bit::Zero) => Ok(T::one()),
        (ProtocolKind::Semi, Bit::One) => {
            let (c, _) = quarter_turn_cos_sin::<T>(1, params.n);
            Ok(c.powi(2).powf(T::of_u64(params.n)))
        }
    }
}

/// Mergeable per-trial counts. `merge` is commutative and associative, so
/// any split of the trials across threads gives the same tally.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnsembleTally {
    pub trials: u64,
    pub events: BTreeMap<TerminalEvent, u64>,
    pub channel_hits: u64,
    pub f_histogram: BTreeMap<u64, u64>,
    /// Successful trials (correct detector) per measurement frequency.
    pub success_f_histogram: BTreeMap<u64, u64>,
    /// Detector clicks with a nonzero channel-visit count.
    pub detector_clicks_with_channel_visits: u64,
}

impl EnsembleTally {
    pub fn record(&mut self, outcome: &TrialOutcome, kind: ProtocolKind, bit: Bit) {
        self.trials += 1;
        *self.events.entry(outcome.event).or_default() += 1;
        if outcome.channel_visits > 0 {
            self.channel_hits += 1;
            if outcome.event.label.is_detector() {
                self.detector_clicks_with_channel_visits += 1;
            }
        }
        *self.f_histogram.entry(outcome.f).or_default() += 1;
        if outcome.is_success(kind, bit) {
            *self.success_f_histogram.entry(outcome.f).or_default() += 1;
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.channel_hits += other.channel_hits;
        self.detector_clicks_with_channel_visits += other.detector_clicks_with_channel_visits;
        for (k, v) in other.events {
            *self.events.entry(k).or_default() += v;
        }
        for (k, v) in other.f_histogram {
            *self.f_histogram.entry(k).or_default() += v;
        }
        for (k, v) in other.success_f_histogram {
            *self.success_f_histogram.entry(k).or_default() += v;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStats<T> {
    pub event: TerminalEvent,
    pub exact: T,
    pub count: u64,
    pub frequency: T,
    /// Empirical standard error `sqrt(f (1 - f) / K)`.
    pub std_error: T,
    /// `(frequency - exact) / sqrt(exact (1 - exact) / K)`; absent when the
    /// exact probability is degenerate and the counts disagree with it.
    pub z_score: Option<T>,
}

impl<T: Scalar> EventStats<T> {
    fn new(event: TerminalEvent, exact: T, count: u64, trials: u64) -> Self {
        let k = T::of_u64(trials);
        let frequency = T::of_u64(count) / k;
        let std_error = (frequency * (T::one() - frequency) / k).sqrt();
        let sigma = (exact * (T::one() - exact) / k).sqrt();
        let diff = frequency - exact;
        let z_score = if sigma > T::zero() {
            Some(diff / sigma)
        } else if diff.abs() <= T::of(1e-12) {
            Some(T::zero())
        } else {
            None
        };
        Self {
            event,
            exact,
            count,
            frequency,
            std_error,
            z_score,
        }
    }

    /// Whether the empirical frequency sits within `k` exact standard errors.
    pub fn within_sigma(&self, k: T) -> bool {
        self.z_score.is_some_and(|z| z.abs() <= k)
    }
}

/// Side-by-side success figures for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison<T> {
    /// Closed-form success probability for the sent bit.
    pub analytic_success: T,
    /// Exact probability that the correct detector clicks.
    pub exact_success: T,
    /// Exact probability that any detector clicks.
    pub exact_survival: T,
    /// Exact probability that the wrong detector clicks.
    pub exact_bit_error: T,
    pub exact_erasure: T,
    pub empirical_success: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats<T> {
    pub params: ProtocolParams,
    pub trials: u64,
    pub master_seed: u64,
    pub events: Vec<EventStats<T>>,
    /// Fraction of trials in which the photon was found in the channel.
    pub epsilon_hat: T,
    pub epsilon_std_error: T,
    pub epsilon_exact: T,
    pub f_histogram: BTreeMap<u64, u64>,
    pub success_f_histogram: BTreeMap<u64, u64>,
    pub detector_clicks_with_channel_visits: u64,
    pub comparison: Comparison<T>,
    pub exact: OutcomeDistribution<T>,
}

impl<T: Scalar> EnsembleStats<T> {
    pub fn event(&self, event: TerminalEvent) -> Option<&EventStats<T>> {
        self.events.iter().find(|e| e.event == event)
    }

    fn from_tally(
        exact: OutcomeDistribution<T>,
        tally: EnsembleTally,
        master_seed: u64,
    ) -> Result<Self> {
        let params = exact.params;
        let trials = tally.trials;
        let k = T::of_u64(trials);
        let mut events: Vec<EventStats<T>> = exact
            .probs
            .iter()
            .map(|e| {
                EventStats::new(
                    e.event,
                    e.probability,
                    tally.events.get(&e.event).copied().unwrap_or(0),
                    trials,
                )
            })
            .collect();
        for (&event, &count) in &tally.events {
            if !events.iter().any(|e| e.event == event) {
                events.push(EventStats::new(event, T::zero(), count, trials));
            }
        }
        let epsilon_hat = T::of_u64(tally.channel_hits) / k;
        let success_label = correct_detector(params.kind, params.bit);
        let successes: u64 = tally
            .events
            .iter()
            .filter(|(e, _)| e.label == success_label)
            .map(|(_, c)| c)
            .sum();
        let comparison = Comparison {
            analytic_success: analytic_success(&params)?,
            exact_success: exact.success(),
            exact_survival: exact.survival(),
            exact_bit_error: exact.bit_error(),
            exact_erasure: exact.erasure(),
            empirical_success: T::of_u64(successes) / k,
        };
        Ok(Self {
            params,
            trials,
            master_seed,
            events,
            epsilon_hat,
            epsilon_std_error: (epsilon_hat * (T::one() - epsilon_hat) / k).sqrt(),
            epsilon_exact: exact.channel_presence(),
            f_histogram: tally.f_histogram,
            success_f_histogram: tally.success_f_histogram,
            detector_clicks_with_channel_visits: tally.detector_clicks_with_channel_visits,
            comparison,
            exact,
        })
    }
}

/// Runs `trials` seeded photons (indices `0..trials`) and compares them with
/// the exact distribution. Trials run on the current rayon pool.
pub fn run_ensemble<T: Scalar>(
    params: ProtocolParams,
    trials: u64,
    master_seed: u64,
) -> Result<EnsembleStats<T>> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let machine = Interferometer::<T>::new(params)?;
    let params = *machine.params();
    let tally = (0..trials)
        .into_par_iter()
        .map(|i| machine.trial(master_seed, i))
        .try_fold(EnsembleTally::default, |mut tally, outcome| {
            tally.record(&outcome?, params.kind, params.bit);
            Ok::<_, Error>(tally)
        })
        .try_reduce(EnsembleTally::default, |a, b| Ok(a.merge(b)))?;
    EnsembleStats::from_tally(machine.exact()?, tally, master_seed)
}
