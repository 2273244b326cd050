//! Optical elements and channels, each realized as a [`ModeTransform`].

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::{FockError, ModeLabel, ModeTransform, PhotonicState, Polarization, Rail, TimeBin};

#[derive(Debug, Error, PartialEq)]
pub enum ElementError {
    #[error("beam splitter needs two distinct rails, got {0} twice")]
    SameRail(Rail),

    #[error("unsupported wave-plate angle {0} degrees (expected 0, 22.5 or 45)")]
    UnsupportedAngle(f64),

    #[error("polarizing beam splitter needs 1 or 2 distinct inputs and 2 distinct outputs, got {inputs} -> {outputs}")]
    RailCountMismatch { inputs: usize, outputs: usize },

    #[error("|alpha|^2 + |beta|^2 = {0}, expected 1")]
    NotNormalized(f64),

    #[error("rail {0} already carries time tags")]
    AlreadyTagged(Rail),

    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Tolerance on `|alpha|^2 + |beta|^2 = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// The three wave-plate orientations the protocols use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwpAngle {
    /// sigma_z.
    Deg0,
    /// Hadamard.
    Deg22_5,
    /// H <-> V.
    Deg45,
}

impl HwpAngle {
    pub fn from_degrees(deg: f64) -> Result<Self, ElementError> {
        if deg == 0.0 {
            Ok(HwpAngle::Deg0)
        } else if deg == 22.5 {
            Ok(HwpAngle::Deg22_5)
        } else if deg == 45.0 {
            Ok(HwpAngle::Deg45)
        } else {
            Err(ElementError::UnsupportedAngle(deg))
        }
    }

    pub fn degrees(self) -> f64 {
        match self {
            HwpAngle::Deg0 => 0.0,
            HwpAngle::Deg22_5 => 22.5,
            HwpAngle::Deg45 => 45.0,
        }
    }

    /// Jones matrix `[[cos 2t, sin 2t], [sin 2t, -cos 2t]]` with exact entries.
    fn jones(self) -> [[f64; 2]; 2] {
        match self {
            HwpAngle::Deg0 => [[1.0, 0.0], [0.0, -1.0]],
            HwpAngle::Deg22_5 => [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]],
            HwpAngle::Deg45 => [[0.0, 1.0], [1.0, 0.0]],
        }
    }
}

/// One stage of a circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementSpec {
    BeamSplitter { a: Rail, b: Rail },
    Pbs { inputs: Vec<Rail>, outputs: Vec<Rail> },
    HalfWavePlate { rail: Rail, angle: HwpAngle },
    TimeDelay { rail: Rail },
    SigmaZ { rail: Rail },
    Attenuation { alpha: C64, beta: C64, rails: Vec<Rail> },
}

impl ElementSpec {
    pub fn rails(&self) -> Vec<Rail> {
        match self {
            ElementSpec::BeamSplitter { a, b } => vec![*a, *b],
            ElementSpec::Pbs { inputs, outputs } => inputs.iter().chain(outputs).copied().collect(),
            ElementSpec::HalfWavePlate { rail, .. }
            | ElementSpec::TimeDelay { rail }
            | ElementSpec::SigmaZ { rail } => vec![*rail],
            ElementSpec::Attenuation { rails, .. } => rails.clone(),
        }
    }

    pub fn transform(&self) -> Result<ModeTransform, ElementError> {
        match self {
            ElementSpec::BeamSplitter { a, b } => beam_splitter(*a, *b),
            ElementSpec::Pbs { inputs, outputs } => pbs(inputs, outputs),
            ElementSpec::HalfWavePlate { rail, angle } => Ok(wave_plate(*rail, *angle)),
            ElementSpec::TimeDelay { rail } => Ok(time_delay(*rail)),
            ElementSpec::SigmaZ { rail } => Ok(sigma_z(*rail)),
            ElementSpec::Attenuation { alpha, beta, rails } => attenuation(*alpha, *beta, rails),
        }
    }

    /// Applies the element to `state`. A time delay on a rail whose photons
    /// are already tagged is rejected.
    pub fn apply(&self, state: &PhotonicState) -> Result<PhotonicState, ElementError> {
        if let ElementSpec::TimeDelay { rail } = self {
            let tagged = state
                .terms()
                .flat_map(|(c, _)| c.iter().map(|(m, _)| m).collect::<Vec<_>>())
                .any(|m| m.rail == *rail && m.bin != TimeBin::Untagged);
            if tagged {
                return Err(ElementError::AlreadyTagged(*rail));
            }
        }
        Ok(state.apply(&self.transform()?)?)
    }
}

impl fmt::Display for ElementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementSpec::BeamSplitter { a, b } => write!(f, "BS({a}, {b})"),
            ElementSpec::Pbs { inputs, outputs } => {
                let ins: Vec<String> = inputs.iter().map(Rail::to_string).collect();
                let outs: Vec<String> = outputs.iter().map(Rail::to_string).collect();
                write!(f, "PBS({} -> {})", ins.join(", "), outs.join(", "))
            }
            ElementSpec::HalfWavePlate { rail, angle } => write!(f, "HWP{}({rail})", angle.degrees()),
            ElementSpec::TimeDelay { rail } => write!(f, "delay({rail})"),
            ElementSpec::SigmaZ { rail } => write!(f, "sigma_z({rail})"),
            ElementSpec::Attenuation { alpha, beta, rails } => {
                let rs: Vec<String> = rails.iter().map(Rail::to_string).collect();
                write!(f, "attenuation(alpha={alpha}, beta={beta}; {})", rs.join(", "))
            }
        }
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn modes_on(rail: Rail) -> impl Iterator<Item = ModeLabel> {
    Polarization::BOTH
        .into_iter()
        .flat_map(move |pol| TimeBin::ALL.into_iter().map(move |bin| ModeLabel::new(rail, pol, bin)))
}

/// 50:50 beam splitter: `a -> (a + b)/sqrt 2`, `b -> (-a + b)/sqrt 2` on every
/// polarization and time bin.
pub fn beam_splitter(a: Rail, b: Rail) -> Result<ModeTransform, ElementError> {
    if a == b {
        return Err(ElementError::SameRail(a));
    }
    let mut columns = BTreeMap::new();
    for ma in modes_on(a) {
        let mb = ModeLabel::new(b, ma.pol, ma.bin);
        columns.insert(ma, vec![(ma, re(FRAC_1_SQRT_2)), (mb, re(FRAC_1_SQRT_2))]);
        columns.insert(mb, vec![(ma, re(-FRAC_1_SQRT_2)), (mb, re(FRAC_1_SQRT_2))]);
    }
    Ok(ModeTransform::new(columns, true)?)
}

/// Half-wave plate at one of the supported orientations, acting identically
/// on every time bin.
pub fn hwp(rail: Rail, angle_degrees: f64) -> Result<ModeTransform, ElementError> {
    Ok(wave_plate(rail, HwpAngle::from_degrees(angle_degrees)?))
}

fn wave_plate(rail: Rail, angle: HwpAngle) -> ModeTransform {
    let j = angle.jones();
    let mut columns = BTreeMap::new();
    for bin in TimeBin::ALL {
        let h = ModeLabel::new(rail, Polarization::H, bin);
        let v = ModeLabel::new(rail, Polarization::V, bin);
        columns.insert(h, vec![(h, re(j[0][0])), (v, re(j[1][0]))]);
        columns.insert(v, vec![(h, re(j[0][1])), (v, re(j[1][1]))]);
    }
    ModeTransform::new(columns, true).expect("wave plates are unitary")
}

/// `sigma_z = |H><H| - |V><V|`.
pub fn sigma_z(rail: Rail) -> ModeTransform {
    wave_plate(rail, HwpAngle::Deg0)
}

/// Unbalanced interferometer tagging H with `T0` and V with `T1`.
pub fn time_delay(rail: Rail) -> ModeTransform {
    let mut columns = BTreeMap::new();
    for (pol, bin) in [(Polarization::H, TimeBin::T0), (Polarization::V, TimeBin::T1)] {
        columns.insert(
            ModeLabel::untagged(rail, pol),
            vec![(ModeLabel::new(rail, pol, bin), re(1.0))],
        );
    }
    ModeTransform::new(columns, true).expect("relabeling is unitary")
}

/// Polarizing beam splitter. H on `inputs[0]` exits at `outputs[0]` and V at
/// `outputs[1]`; an optional second input exits at the opposite ports. Time
/// tags are preserved.
pub fn pbs(inputs: &[Rail], outputs: &[Rail]) -> Result<ModeTransform, ElementError> {
    let mismatch = ElementError::RailCountMismatch {
        inputs: inputs.len(),
        outputs: outputs.len(),
    };
    if !(1..=2).contains(&inputs.len()) || outputs.len() != 2 || outputs[0] == outputs[1] {
        return Err(mismatch);
    }
    if inputs.len() == 2 && inputs[0] == inputs[1] {
        return Err(mismatch);
    }
    let mut columns = BTreeMap::new();
    for (k, input) in inputs.iter().enumerate() {
        let (transmit, reflect) = if k == 0 {
            (outputs[0], outputs[1])
        } else {
            (outputs[1], outputs[0])
        };
        for bin in TimeBin::ALL {
            columns.insert(
                ModeLabel::new(*input, Polarization::H, bin),
                vec![(ModeLabel::new(transmit, Polarization::H, bin), re(1.0))],
            );
            columns.insert(
                ModeLabel::new(*input, Polarization::V, bin),
                vec![(ModeLabel::new(reflect, Polarization::V, bin), re(1.0))],
            );
        }
    }
    Ok(ModeTransform::new(columns, true)?)
}

/// Non-unitary channel that turns the maximally entangled source pairs into
/// the less-entangled ones: on every listed rail, H amplitudes are scaled by
/// `alpha * sqrt 2` and V amplitudes by `beta * sqrt 2`.
///
/// Each listed rail must carry exactly one photon of one source pair, whose
/// polarization identifies that pair's branch. The caller renormalizes.
pub fn attenuation(alpha: C64, beta: C64, rails: &[Rail]) -> Result<ModeTransform, ElementError> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if !norm.is_finite() || (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(ElementError::NotNormalized(norm));
    }
    let mut columns = BTreeMap::new();
    for rail in rails {
        for bin in TimeBin::ALL {
            let h = ModeLabel::new(*rail, Polarization::H, bin);
            let v = ModeLabel::new(*rail, Polarization::V, bin);
            columns.insert(h, vec![(h, alpha * SQRT_2)]);
            columns.insert(v, vec![(v, beta * SQRT_2)]);
        }
    }
    Ok(ModeTransform::new(columns, false)?)
}
