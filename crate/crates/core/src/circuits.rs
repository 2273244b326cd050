//! Protocol builders: sources, circuit layout and propagation up to the
//! detectors.
//!
//! Both protocols share one layout. Two GHZ sources fill the unprimed rails
//! `A, B, C, ...` and the primed rails `A', B', C', ...`; photons `A` and `B'`
//! meet on a beam splitter before the channel degrades the state. Alice flips
//! `A'`, both `A` and `B'` are time-tagged and Hadamard-rotated, and every
//! measured rail (`A`, `B'` and the extra primed rails) ends on a polarizing
//! beam splitter feeding two detectors. The two-party case is the Bell
//! protocol.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::elements::{ElementError, ElementSpec, HwpAngle, NORMALIZATION_TOLERANCE};
use crate::fock::{FockError, ModeLabel, OccupationConfig, PhotonicState, Polarization, Rail};

/// Largest supported party count (one letter per party).
pub const MAX_PARTIES: u8 = 26;

/// Tolerance on the overlap deficit when recognizing a recyclable state.
pub const RECYCLABLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("GHZ protocol needs between 2 and {MAX_PARTIES} parties, got {0}")]
    InvalidParties(u8),

    #[error("|alpha|^2 + |beta|^2 = {0}, expected 1")]
    NotNormalized(f64),

    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),

    #[error("state is not of the recyclable form (overlap deficit {deficit:.3e})")]
    NotRecyclable { deficit: f64 },

    #[error("invalid circuit plan: {0}")]
    InvalidPlan(String),

    #[error(transparent)]
    Element(#[from] ElementError),

    #[error(transparent)]
    Fock(#[from] FockError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Bell,
    Ghz(u8),
}

impl Protocol {
    pub fn parties(self) -> u8 {
        match self {
            Protocol::Bell => 2,
            Protocol::Ghz(n) => n,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Bell => write!(f, "Bell"),
            Protocol::Ghz(n) => write!(f, "GHZ({n})"),
        }
    }
}

/// A protocol instance: which states, the unknown channel parameters and how
/// many recycling rounds to run after the first pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSpec {
    pub protocol: Protocol,
    pub alpha: C64,
    pub beta: C64,
    pub recycle_rounds: u32,
}

impl ProtocolSpec {
    pub fn new(protocol: Protocol, alpha: C64, beta: C64) -> Result<Self, CircuitError> {
        let n = protocol.parties();
        if !(2..=MAX_PARTIES).contains(&n) {
            return Err(CircuitError::InvalidParties(n));
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(CircuitError::NotNormalized(norm));
        }
        Ok(ProtocolSpec {
            protocol,
            alpha,
            beta,
            recycle_rounds: 0,
        })
    }

    /// Real parameters `alpha` and `beta = sqrt(1 - alpha^2)`.
    pub fn from_alpha(protocol: Protocol, alpha: f64) -> Result<Self, CircuitError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CircuitError::AlphaOutOfRange(alpha));
        }
        let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
        Self::new(protocol, C64::new(alpha, 0.0), C64::new(beta, 0.0))
    }

    pub fn with_rounds(mut self, rounds: u32) -> Self {
        self.recycle_rounds = rounds;
        self
    }

    pub fn parties(&self) -> u8 {
        self.protocol.parties()
    }

    /// Rails holding the photons that survive the protocol: `A', B, C, ...`.
    pub fn kept_rails(&self) -> Vec<Rail> {
        kept_rails(self.parties())
    }

    /// `|alpha|^4 + |beta|^4`.
    pub fn recyclable_weight(&self) -> f64 {
        self.alpha.norm_sqr().powi(2) + self.beta.norm_sqr().powi(2)
    }

    /// Coefficients `(alpha^2, beta^2) / sqrt(|alpha|^4 + |beta|^4)` of the
    /// recyclable output.
    pub fn recycled_coefficients(&self) -> (C64, C64) {
        let scale = self.recyclable_weight().sqrt();
        (self.alpha * self.alpha / scale, self.beta * self.beta / scale)
    }

    /// `(|H...H> + |V...V>)/sqrt 2` on the kept rails.
    pub fn success_target(&self) -> PhotonicState {
        let kept = self.kept_rails();
        let all = |pol: Polarization| OccupationConfig::from_modes(kept.iter().map(|&r| ModeLabel::untagged(r, pol)));
        PhotonicState::from_terms([
            (all(Polarization::H), C64::new(FRAC_1_SQRT_2, 0.0)),
            (all(Polarization::V), C64::new(FRAC_1_SQRT_2, 0.0)),
        ])
        .expect("finite amplitudes, equal photon numbers")
    }

    /// `alpha' |V H ... H> + beta' |H V ... V>` on the kept rails, the flip
    /// sitting on `A'`.
    pub fn recyclable_target(&self) -> PhotonicState {
        let kept = self.kept_rails();
        let (a1, b1) = self.recycled_coefficients();
        let branch = |first: Polarization| {
            OccupationConfig::from_modes(kept.iter().enumerate().map(|(i, &r)| {
                let pol = if i == 0 { first } else { first.flipped() };
                ModeLabel::untagged(r, pol)
            }))
        };
        PhotonicState::from_terms([(branch(Polarization::V), a1), (branch(Polarization::H), b1)])
            .expect("finite amplitudes, equal photon numbers")
    }
}

pub(crate) fn kept_rails(parties: u8) -> Vec<Rail> {
    std::iter::once(Rail::A_PRIME)
        .chain((1..parties).map(Rail::unprimed))
        .collect()
}

pub(crate) fn measured_rails(parties: u8) -> Vec<Rail> {
    [Rail::A, Rail::B_PRIME]
        .into_iter()
        .chain((2..parties).map(Rail::primed))
        .collect()
}

/// One detector: the measured rail it watches and the PBS port it sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorPort {
    pub id: u8,
    pub rail: Rail,
    pub pol: Polarization,
}

/// Assignment of detector indices to PBS output ports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorMap {
    ports: Vec<DetectorPort>,
}

impl DetectorMap {
    /// The labelling that reproduces the reference signature tables.
    ///
    /// Alice's PBS on `A` feeds `D1` (H) and `D2` (V), Bob's on `B'` feeds
    /// `D3` (H) and `D4` (V). On the remaining primed rails the reflected
    /// port takes the odd index: Charlie's PBS on `C'` feeds `D5` (V) and
    /// `D6` (H), and so on.
    pub fn canonical(parties: u8) -> Self {
        let mut ports = Vec::new();
        for (k, rail) in measured_rails(parties).into_iter().enumerate() {
            let odd = 2 * k as u8 + 1;
            let (h, v) = if k < 2 { (odd, odd + 1) } else { (odd + 1, odd) };
            ports.push(DetectorPort {
                id: h,
                rail,
                pol: Polarization::H,
            });
            ports.push(DetectorPort {
                id: v,
                rail,
                pol: Polarization::V,
            });
        }
        ports.sort_by_key(|p| p.id);
        DetectorMap { ports }
    }

    /// Exchanges the ports of two detectors.
    pub fn with_swapped(mut self, a: u8, b: u8) -> Self {
        for p in &mut self.ports {
            if p.id == a {
                p.id = b;
            } else if p.id == b {
                p.id = a;
            }
        }
        self.ports.sort_by_key(|p| p.id);
        self
    }

    pub fn ports(&self) -> &[DetectorPort] {
        &self.ports
    }

    pub fn port(&self, id: u8) -> Option<&DetectorPort> {
        self.ports.iter().find(|p| p.id == id)
    }

    /// Detector index on `rail` behind polarization `pol`.
    pub fn detector_for(&self, rail: Rail, pol: Polarization) -> Option<u8> {
        self.ports.iter().find(|p| p.rail == rail && p.pol == pol).map(|p| p.id)
    }

    pub fn detector_rails(&self) -> BTreeSet<Rail> {
        self.ports.iter().map(|p| Rail::detector(p.id)).collect()
    }
}

/// The ordered element list plus the measurement layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitPlan {
    pub elements: Vec<ElementSpec>,
    pub measured: Vec<Rail>,
    pub kept: Vec<Rail>,
    pub detectors: DetectorMap,
}

impl CircuitPlan {
    /// Rails that passed a time-delay element.
    pub fn delayed_rails(&self) -> BTreeSet<Rail> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                ElementSpec::TimeDelay { rail } => Some(*rail),
                _ => None,
            })
            .collect()
    }

    /// Detectors fed by time-tagged rails.
    pub fn delayed_detectors(&self) -> BTreeSet<u8> {
        let delayed = self.delayed_rails();
        self.detectors
            .ports()
            .iter()
            .filter(|p| delayed.contains(&p.rail))
            .map(|p| p.id)
            .collect()
    }

    /// Replaces the detector assignment and rewires the PBS stages to match.
    pub fn with_detectors(mut self, detectors: DetectorMap) -> Result<Self, CircuitError> {
        for e in &mut self.elements {
            if let ElementSpec::Pbs { inputs, outputs } = e {
                let rail = inputs[0];
                let port = |pol| {
                    detectors
                        .detector_for(rail, pol)
                        .map(Rail::detector)
                        .ok_or_else(|| CircuitError::InvalidPlan(format!("no detector for {rail}")))
                };
                *outputs = vec![port(Polarization::H)?, port(Polarization::V)?];
            }
        }
        self.detectors = detectors;
        self.validate()?;
        Ok(self)
    }

    /// Every party rail is either measured or kept, never both, and no rail
    /// is delayed twice.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let measured: BTreeSet<Rail> = self.measured.iter().copied().collect();
        let kept: BTreeSet<Rail> = self.kept.iter().copied().collect();
        if measured.len() != self.measured.len() || kept.len() != self.kept.len() {
            return Err(CircuitError::InvalidPlan("duplicate rail in layout".into()));
        }
        if let Some(r) = measured.intersection(&kept).next() {
            return Err(CircuitError::InvalidPlan(format!("rail {r} both measured and kept")));
        }
        let touched: BTreeSet<Rail> = self
            .elements
            .iter()
            .flat_map(ElementSpec::rails)
            .filter(|r| !r.is_detector())
            .collect();
        if let Some(r) = touched.iter().find(|r| !measured.contains(r) && !kept.contains(r)) {
            return Err(CircuitError::InvalidPlan(format!(
                "rail {r} is neither measured nor kept"
            )));
        }
        let delays = self
            .elements
            .iter()
            .filter(|e| matches!(e, ElementSpec::TimeDelay { .. }))
            .count();
        if delays != self.delayed_rails().len() {
            return Err(CircuitError::InvalidPlan("rail delayed more than once".into()));
        }
        for rail in &self.measured {
            let fed = self
                .elements
                .iter()
                .any(|e| matches!(e, ElementSpec::Pbs { inputs, .. } if inputs.contains(rail)));
            if !fed {
                return Err(CircuitError::InvalidPlan(format!(
                    "measured rail {rail} has no detector"
                )));
            }
        }
        Ok(())
    }
}

/// Two GHZ states `(|H..H> + |V..V>)/sqrt 2`, one on the unprimed and one on
/// the primed rails. For two parties these are the two Bell pairs.
pub fn prepare_sources(spec: &ProtocolSpec) -> Result<PhotonicState, CircuitError> {
    let n = spec.parties();
    let ghz = |primed: bool| {
        let rails: Vec<Rail> = (0..n).map(|i| Rail::Party { index: i, primed }).collect();
        let branch = |pol| OccupationConfig::from_modes(rails.iter().map(|&r| ModeLabel::untagged(r, pol)));
        PhotonicState::from_terms([
            (branch(Polarization::H), C64::new(FRAC_1_SQRT_2, 0.0)),
            (branch(Polarization::V), C64::new(FRAC_1_SQRT_2, 0.0)),
        ])
    };
    Ok(ghz(false)?.tensor(&ghz(true)?)?)
}

pub fn build_plan(spec: &ProtocolSpec) -> CircuitPlan {
    let n = spec.parties();
    let detectors = DetectorMap::canonical(n);
    let measured = measured_rails(n);
    let kept = kept_rails(n);
    let mut elements = vec![
        ElementSpec::BeamSplitter {
            a: Rail::A,
            b: Rail::B_PRIME,
        },
        ElementSpec::Attenuation {
            alpha: spec.alpha,
            beta: spec.beta,
            rails: vec![Rail::B, Rail::A_PRIME],
        },
        ElementSpec::HalfWavePlate {
            rail: Rail::A_PRIME,
            angle: HwpAngle::Deg45,
        },
        ElementSpec::TimeDelay { rail: Rail::A },
        ElementSpec::TimeDelay { rail: Rail::B_PRIME },
    ];
    for &rail in &measured {
        elements.push(ElementSpec::HalfWavePlate {
            rail,
            angle: HwpAngle::Deg22_5,
        });
    }
    for &rail in &measured {
        let port = |pol| {
            Rail::detector(
                detectors
                    .detector_for(rail, pol)
                    .expect("canonical map covers every measured rail"),
            )
        };
        elements.push(ElementSpec::Pbs {
            inputs: vec![rail],
            outputs: vec![port(Polarization::H), port(Polarization::V)],
        });
    }
    CircuitPlan {
        elements,
        measured,
        kept,
        detectors,
    }
}

/// Runs `plan` on the sources of `spec` and returns the normalized state
/// that reaches the detectors.
pub fn run_plan(spec: &ProtocolSpec, plan: &CircuitPlan) -> Result<PhotonicState, CircuitError> {
    plan.validate()?;
    let mut state = prepare_sources(spec)?;
    for element in &plan.elements {
        state = element.apply(&state)?;
        if matches!(element, ElementSpec::Attenuation { .. }) {
            state = state.normalized();
        }
    }
    Ok(state)
}

pub fn run_to_premeasurement(spec: &ProtocolSpec) -> Result<PhotonicState, CircuitError> {
    run_plan(spec, &build_plan(spec))
}

/// Reads the recyclable coefficients off `residual` and returns the spec
/// for the next round.
///
/// A 45-degree wave plate on `A'` turns `alpha'|V H..⟩ + beta'|H V..⟩` into
/// the less-entangled form `alpha'|H..H⟩ + beta'|V..V⟩`, which is what a
/// fresh round consumes. The global phase is fixed so the first nonzero
/// coefficient is real and positive.
pub fn recyclable_to_input(residual: &PhotonicState, spec: &ProtocolSpec) -> Result<ProtocolSpec, CircuitError> {
    let kept = spec.kept_rails();
    let flipped = residual.normalized().apply(
        &ElementSpec::HalfWavePlate {
            rail: Rail::A_PRIME,
            angle: HwpAngle::Deg45,
        }
        .transform()?,
    )?;
    let all = |pol| OccupationConfig::from_modes(kept.iter().map(|&r| ModeLabel::untagged(r, pol)));
    let a = flipped.amplitude(&all(Polarization::H));
    let b = flipped.amplitude(&all(Polarization::V));
    let weight = a.norm_sqr() + b.norm_sqr();
    let deficit = 1.0 - weight;
    if residual.is_empty() || deficit.abs() > RECYCLABLE_TOLERANCE {
        return Err(CircuitError::NotRecyclable { deficit });
    }
    let reference = if a.norm() > 0.0 { a } else { b };
    let phase = reference.conj() / reference.norm();
    let scale = phase / weight.sqrt();
    let mut next = ProtocolSpec::new(spec.protocol, a * scale, b * scale)?;
    next.recycle_rounds = spec.recycle_rounds.saturating_sub(1);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(matches!(
            ProtocolSpec::from_alpha(Protocol::Ghz(1), 0.6),
            Err(CircuitError::InvalidParties(1))
        ));
        assert!(matches!(
            ProtocolSpec::new(Protocol::Bell, C64::new(0.6, 0.0), C64::new(0.6, 0.0)),
            Err(CircuitError::NotNormalized(_))
        ));
        assert!(ProtocolSpec::from_alpha(Protocol::Bell, 1.2).is_err());
    }

    #[test]
    fn sources_have_four_equal_terms() {
        for protocol in [Protocol::Bell, Protocol::Ghz(3)] {
            let spec = ProtocolSpec::from_alpha(protocol, 0.6).unwrap();
            let s = prepare_sources(&spec).unwrap();
            assert_eq!(s.len(), 4);
            for (_, a) in s.terms() {
                assert!((a - C64::new(0.5, 0.0)).norm() < 1e-15);
            }
            assert_eq!(s.photon_count(), Some(2 * protocol.parties() as u32));
        }
    }

    #[test]
    fn bell_plan_has_nine_stages() {
        let spec = ProtocolSpec::from_alpha(Protocol::Bell, 0.6).unwrap();
        let plan = build_plan(&spec);
        let names: Vec<String> = plan.elements.iter().map(|e| e.to_string()).collect();
        assert_eq!(plan.elements.len(), 9, "{names:?}");
        assert_eq!(plan.kept, vec![Rail::A_PRIME, Rail::B]);
        assert_eq!(plan.measured, vec![Rail::A, Rail::B_PRIME]);
        assert_eq!(names[0], "BS(A, B')");
        assert_eq!(names[7], "PBS(A -> D1, D2)");
        assert_eq!(names[8], "PBS(B' -> D3, D4)");
        plan.validate().unwrap();
    }

    #[test]
    fn ghz3_plan_extends_bell_plan() {
        let bell = build_plan(&ProtocolSpec::from_alpha(Protocol::Bell, 0.6).unwrap());
        let ghz = build_plan(&ProtocolSpec::from_alpha(Protocol::Ghz(3), 0.6).unwrap());
        assert_eq!(ghz.elements.len(), 11);
        let extra: Vec<_> = ghz.elements.iter().filter(|e| !bell.elements.contains(e)).collect();
        assert_eq!(
            extra,
            vec![
                &ElementSpec::HalfWavePlate {
                    rail: Rail::C_PRIME,
                    angle: HwpAngle::Deg22_5
                },
                &ElementSpec::Pbs {
                    inputs: vec![Rail::C_PRIME],
                    outputs: vec![Rail::detector(6), Rail::detector(5)]
                },
            ]
        );
        assert_eq!(ghz.kept, vec![Rail::A_PRIME, Rail::B, Rail::C]);
    }

    #[test]
    fn ghz2_is_bell() {
        let a = ProtocolSpec::from_alpha(Protocol::Bell, 0.37).unwrap();
        let b = ProtocolSpec::from_alpha(Protocol::Ghz(2), 0.37).unwrap();
        assert_eq!(prepare_sources(&a).unwrap(), prepare_sources(&b).unwrap());
        assert_eq!(build_plan(&a), build_plan(&b));
        assert_eq!(run_to_premeasurement(&a).unwrap(), run_to_premeasurement(&b).unwrap());
    }

    #[test]
    fn canonical_detector_map() {
        let map = DetectorMap::canonical(3);
        assert_eq!(map.detector_for(Rail::A, Polarization::H), Some(1));
        assert_eq!(map.detector_for(Rail::A, Polarization::V), Some(2));
        assert_eq!(map.detector_for(Rail::B_PRIME, Polarization::H), Some(3));
        assert_eq!(map.detector_for(Rail::B_PRIME, Polarization::V), Some(4));
        assert_eq!(map.detector_for(Rail::C_PRIME, Polarization::V), Some(5));
        assert_eq!(map.detector_for(Rail::C_PRIME, Polarization::H), Some(6));
        let swapped = map.with_swapped(2, 3);
        assert_eq!(swapped.detector_for(Rail::A, Polarization::V), Some(3));
    }

    #[test]
    fn premeasurement_is_normalized_and_alpha_one_keeps_one_branch() {
        let s = run_to_premeasurement(&ProtocolSpec::from_alpha(Protocol::Bell, 0.6).unwrap()).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let s = run_to_premeasurement(&ProtocolSpec::from_alpha(Protocol::Bell, 1.0).unwrap()).unwrap();
        let kept = BTreeSet::from([Rail::A_PRIME, Rail::B]);
        let vh = OccupationConfig::from_modes([
            ModeLabel::untagged(Rail::A_PRIME, Polarization::V),
            ModeLabel::untagged(Rail::B, Polarization::H),
        ]);
        for (c, _) in s.terms() {
            assert_eq!(c.partition(&kept).0, vh);
        }
    }

    #[test]
    fn recycling_coefficients() {
        let spec = ProtocolSpec::from_alpha(Protocol::Bell, FRAC_1_SQRT_2).unwrap();
        let next = recyclable_to_input(&spec.recyclable_target(), &spec).unwrap();
        assert!((next.alpha.re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((next.beta.re - FRAC_1_SQRT_2).abs() < 1e-12);

        let spec = ProtocolSpec::from_alpha(Protocol::Bell, 0.6).unwrap();
        let next = recyclable_to_input(&spec.recyclable_target().scaled(C64::new(0.0, -1.0)), &spec).unwrap();
        // 0.36 / sqrt(0.36^2 + 0.64^2)
        assert!((next.alpha.re - 0.490_261_239_632_558_9).abs() < 1e-12);
        assert!(next.alpha.im.abs() < 1e-15);

        let spec = ProtocolSpec::from_alpha(Protocol::Bell, 1.0).unwrap();
        let next = recyclable_to_input(&spec.recyclable_target(), &spec).unwrap();
        assert!((next.alpha.re - 1.0).abs() < 1e-15);
        assert_eq!(next.beta.norm(), 0.0);
    }

    #[test]
    fn non_recyclable_state_rejected() {
        let spec = ProtocolSpec::from_alpha(Protocol::Bell, 0.6).unwrap();
        let err = recyclable_to_input(&spec.success_target(), &spec).unwrap_err();
        assert!(matches!(err, CircuitError::NotRecyclable { .. }));
    }
}
