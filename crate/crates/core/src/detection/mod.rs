//! Detector click patterns, their probabilities, classification and the
//! heralded outcomes after feed-forward.
//!
//! Detectors do not resolve photon number: two photons arriving at one
//! detector in one time bin give a single click. They also record only the
//! *relative* arrival time of the clicks. When every photon behind the
//! delayed rails lands in the same bin the pattern carries no time tag, and
//! the `T0` and `T1` versions of that pattern are the same measurement
//! outcome, so their amplitudes add.

mod classify;
pub mod tables;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::circuits::{self, CircuitError, CircuitPlan, Protocol, ProtocolSpec};
use crate::elements;
use crate::fock::{FockError, ModeLabel, OccupationConfig, PhotonicState, Rail, TimeBin};

pub use classify::{classify, classify_by_rule};

/// Fidelity threshold for a residual to count as its label's target.
pub const FIDELITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum DetectionError {
    #[error("pattern {pattern} is unreachable in the {protocol} protocol: {reason}")]
    Unreachable {
        pattern: String,
        protocol: Protocol,
        reason: String,
    },

    #[error("cannot parse click pattern {0:?}")]
    BadPattern(String),

    #[error(transparent)]
    Circuit(#[from] CircuitError),

    #[error(transparent)]
    Fock(#[from] FockError),
}

/// One detector firing with its (relative) time tag.
pub type Click = (u8, TimeBin);

/// The set of clicks observed in one run, ordered by detector then time bin.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClickPattern(BTreeSet<Click>);

impl ClickPattern {
    pub fn iter(&self) -> impl Iterator<Item = &Click> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<Click> for ClickPattern {
    fn from_iter<I: IntoIterator<Item = Click>>(iter: I) -> Self {
        ClickPattern(iter.into_iter().collect())
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (id, bin)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match bin {
                TimeBin::Untagged => write!(f, "D{id}")?,
                TimeBin::T0 => write!(f, "D{id}^t0")?,
                TimeBin::T1 => write!(f, "D{id}^t1")?,
            }
        }
        Ok(())
    }
}

impl FromStr for ClickPattern {
    type Err = DetectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DetectionError::BadPattern(s.to_string());
        s.split(',')
            .map(|tok| {
                let tok = tok.trim();
                let (det, bin) = match tok.split_once('^') {
                    None => (tok, TimeBin::Untagged),
                    Some((d, "t0")) => (d, TimeBin::T0),
                    Some((d, "t1")) => (d, TimeBin::T1),
                    Some(_) => return Err(bad()),
                };
                let id: u8 = det.strip_prefix('D').ok_or_else(bad)?.parse().map_err(|_| bad())?;
                Ok((id, bin))
            })
            .collect()
    }
}

/// A measured pattern together with the photon counts behind each click.
/// The counts are simulator bookkeeping; classification ignores them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DetectionEvent {
    pub clicks: ClickPattern,
    pub internal_counts: BTreeMap<Click, u32>,
}

impl DetectionEvent {
    fn from_detector_config(config: &OccupationConfig) -> Self {
        let mut internal_counts: BTreeMap<Click, u32> = BTreeMap::new();
        for (mode, n) in config.iter() {
            if let Rail::Detector(id) = mode.rail {
                *internal_counts.entry((id, mode.bin)).or_default() += n;
            }
        }
        DetectionEvent {
            clicks: internal_counts.keys().copied().collect(),
            internal_counts,
        }
    }

    pub fn photons(&self) -> u32 {
        self.internal_counts.values().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    SuccessPlus,
    SuccessMinus,
    RecyclablePlus,
    RecyclableMinus,
}

impl Label {
    pub const ALL: [Label; 4] = [
        Label::SuccessPlus,
        Label::SuccessMinus,
        Label::RecyclablePlus,
        Label::RecyclableMinus,
    ];

    pub fn is_success(self) -> bool {
        matches!(self, Label::SuccessPlus | Label::SuccessMinus)
    }

    pub fn feedforward(self) -> FeedForward {
        match self {
            Label::SuccessPlus | Label::RecyclablePlus => FeedForward::None,
            Label::SuccessMinus | Label::RecyclableMinus => FeedForward::SigmaZOnB,
        }
    }

    /// The state the kept photons are in after feed-forward.
    pub fn target(self, spec: &ProtocolSpec) -> PhotonicState {
        if self.is_success() {
            spec.success_target()
        } else {
            spec.recyclable_target()
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::SuccessPlus => "success+",
            Label::SuccessMinus => "success-",
            Label::RecyclablePlus => "recyclable+",
            Label::RecyclableMinus => "recyclable-",
        };
        f.pad(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeedForward {
    None,
    SigmaZOnB,
}

impl fmt::Display for FeedForward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            FeedForward::None => "none",
            FeedForward::SigmaZOnB => "sigma_z(B)",
        })
    }
}

pub fn apply_feedforward(residual: &PhotonicState, op: FeedForward) -> Result<PhotonicState, FockError> {
    match op {
        FeedForward::None => Ok(residual.clone()),
        FeedForward::SigmaZOnB => residual.apply(&elements::sigma_z(Rail::B)),
    }
}

/// One detection outcome: the event, its probability and the normalized
/// state of the kept photons.
#[derive(Debug, Clone, PartialEq)]
pub struct EventOutcome {
    pub event: DetectionEvent,
    pub probability: f64,
    pub residual: PhotonicState,
}

/// Rewrites detector time tags in the relative frame: if every photon behind
/// `delayed` detectors shares one time bin, those tags are dropped.
fn relative_time_frame(config: &OccupationConfig, delayed: &BTreeSet<u8>) -> OccupationConfig {
    let on_delayed = |m: &ModeLabel| matches!(m.rail, Rail::Detector(id) if delayed.contains(&id));
    let bins: BTreeSet<TimeBin> = config
        .iter()
        .filter(|(m, _)| on_delayed(m))
        .map(|(m, _)| m.bin)
        .collect();
    if bins.len() != 1 || bins.contains(&TimeBin::Untagged) {
        return config.clone();
    }
    config.map_modes(|m| {
        if on_delayed(&m) {
            ModeLabel::new(m.rail, m.pol, TimeBin::Untagged)
        } else {
            m
        }
    })
}

/// Every detection outcome of `state` (the state reaching the detectors of
/// `plan`) with nonzero probability, in canonical event order.
///
/// Probabilities are squared norms of the unnormalized components, so they
/// sum to `|state|^2` exactly when distinct outcomes are orthogonal.
pub fn enumerate_outcomes(state: &PhotonicState, plan: &CircuitPlan) -> Vec<EventOutcome> {
    let delayed = plan.delayed_detectors();
    let detector_rails = plan.detectors.detector_rails();
    let framed = state.map_configs(|c| relative_time_frame(c, &delayed));
    framed
        .split_on(&detector_rails)
        .into_iter()
        .map(|(config, component)| EventOutcome {
            event: DetectionEvent::from_detector_config(&config),
            probability: component.norm_sqr(),
            residual: component.normalized(),
        })
        .collect()
}

/// An outcome after classification and feed-forward.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedEvent {
    pub event: DetectionEvent,
    pub probability: f64,
    pub label: Label,
    pub feedforward: FeedForward,
    /// Kept-photon state after feed-forward.
    pub residual: PhotonicState,
    /// Fidelity of `residual` with the label's target state.
    pub fidelity: f64,
}

/// Classifies every outcome of `plan` run on `spec`. Errors on the first
/// pattern the classifier cannot place.
pub fn classified_events(spec: &ProtocolSpec, plan: &CircuitPlan) -> Result<Vec<ClassifiedEvent>, DetectionError> {
    let state = circuits::run_plan(spec, plan)?;
    let success = spec.success_target();
    let recyclable = spec.recyclable_target();
    enumerate_outcomes(&state, plan)
        .into_par_iter()
        .map(|o| {
            let (label, feedforward) = classify(&o.event.clicks, spec.protocol)?;
            let residual = apply_feedforward(&o.residual, feedforward)?;
            let target = if label.is_success() { &success } else { &recyclable };
            Ok(ClassifiedEvent {
                fidelity: residual.fidelity(target),
                event: o.event,
                probability: o.probability,
                label,
                feedforward,
                residual,
            })
        })
        .collect()
}

/// Aggregated probability mass of one label.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedOutcome {
    pub label: Label,
    pub feedforward: FeedForward,
    pub probability: f64,
    /// Post-feed-forward residual of the most likely event with this label;
    /// empty when the label never occurs.
    pub residual: PhotonicState,
}

/// Runs the protocol and aggregates the outcomes by label, in the order of
/// [`Label::ALL`].
pub fn herald(spec: &ProtocolSpec) -> Result<Vec<HeraldedOutcome>, DetectionError> {
    let plan = circuits::build_plan(spec);
    let events = classified_events(spec, &plan)?;
    Ok(aggregate(&events))
}

pub fn aggregate(events: &[ClassifiedEvent]) -> Vec<HeraldedOutcome> {
    Label::ALL
        .iter()
        .map(|&label| {
            let mine: Vec<&ClassifiedEvent> = events.iter().filter(|e| e.label == label).collect();
            let best = mine
                .iter()
                .copied()
                .reduce(|a, b| if b.probability > a.probability { b } else { a });
            HeraldedOutcome {
                label,
                feedforward: label.feedforward(),
                probability: mine.iter().map(|e| e.probability).sum(),
                residual: best.map(|e| e.residual.clone()).unwrap_or_default(),
            }
        })
        .collect()
}

/// Total probability of the success labels.
pub fn success_mass(outcomes: &[HeraldedOutcome]) -> f64 {
    outcomes
        .iter()
        .filter(|o| o.label.is_success())
        .map(|o| o.probability)
        .sum()
}

pub fn recyclable_mass(outcomes: &[HeraldedOutcome]) -> f64 {
    outcomes
        .iter()
        .filter(|o| !o.label.is_success())
        .map(|o| o.probability)
        .sum()
}
