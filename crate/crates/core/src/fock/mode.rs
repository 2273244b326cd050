//! Mode labels and occupation-number basis configurations.

use std::collections::BTreeSet;
use std::fmt;

/// A spatial path.
///
/// Party rails come in two families: the unprimed rails `A, B, C, ...` carry
/// the photons of the first source and the primed rails `A', B', C', ...`
/// those of the second. Detector rails are the output ports feeding the
/// single-photon detectors `D1, D2, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rail {
    Party { index: u8, primed: bool },
    Detector(u8),
}

impl Rail {
    pub const A: Rail = Rail::Party {
        index: 0,
        primed: false,
    };
    pub const B: Rail = Rail::Party {
        index: 1,
        primed: false,
    };
    pub const C: Rail = Rail::Party {
        index: 2,
        primed: false,
    };
    pub const A_PRIME: Rail = Rail::Party { index: 0, primed: true };
    pub const B_PRIME: Rail = Rail::Party { index: 1, primed: true };
    pub const C_PRIME: Rail = Rail::Party { index: 2, primed: true };

    pub fn unprimed(index: u8) -> Rail {
        Rail::Party { index, primed: false }
    }

    pub fn primed(index: u8) -> Rail {
        Rail::Party { index, primed: true }
    }

    pub fn detector(id: u8) -> Rail {
        Rail::Detector(id)
    }

    pub fn is_detector(&self) -> bool {
        matches!(self, Rail::Detector(_))
    }
}

impl fmt::Display for Rail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rail::Party { index, primed } => {
                let letter = (b'A' + index) as char;
                if primed {
                    write!(f, "{letter}'")
                } else {
                    write!(f, "{letter}")
                }
            }
            Rail::Detector(id) => write!(f, "D{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn flipped(self) -> Polarization {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

/// Arrival-time tag of a photon.
///
/// `Untagged` until the photon passes a time-delay element, which sends the
/// H component to `T0` and the V component to `T1`. The two bins are
/// orthogonal and carry no relative phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeBin {
    Untagged,
    T0,
    T1,
}

impl TimeBin {
    pub const ALL: [TimeBin; 3] = [TimeBin::Untagged, TimeBin::T0, TimeBin::T1];
}

/// One optical mode. Ordering is lexicographic over (rail, polarization, time bin).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub rail: Rail,
    pub pol: Polarization,
    pub bin: TimeBin,
}

impl ModeLabel {
    pub fn new(rail: Rail, pol: Polarization, bin: TimeBin) -> Self {
        ModeLabel { rail, pol, bin }
    }

    /// An untagged mode, the state of every photon before any delay line.
    pub fn untagged(rail: Rail, pol: Polarization) -> Self {
        ModeLabel::new(rail, pol, TimeBin::Untagged)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pol = match self.pol {
            Polarization::H => "H",
            Polarization::V => "V",
        };
        match self.bin {
            TimeBin::Untagged => write!(f, "{pol}@{}", self.rail),
            TimeBin::T0 => write!(f, "{pol}t0@{}", self.rail),
            TimeBin::T1 => write!(f, "{pol}t1@{}", self.rail),
        }
    }
}

/// A multi-photon occupation-number basis state.
///
/// Stored as `(mode, count)` pairs sorted by mode with every count at least
/// one, so two equal configurations are equal element by element.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationConfig {
    occupations: Vec<(ModeLabel, u32)>,
}

impl OccupationConfig {
    /// The zero-photon configuration.
    pub fn vacuum() -> Self {
        OccupationConfig::default()
    }

    /// Builds a configuration from `(mode, count)` pairs. Repeated modes are
    /// summed and zero counts dropped.
    pub fn from_counts<I>(counts: I) -> Self
    where
        I: IntoIterator<Item = (ModeLabel, u32)>,
    {
        let mut occupations: Vec<(ModeLabel, u32)> = counts.into_iter().filter(|&(_, n)| n > 0).collect();
        occupations.sort_by_key(|&(mode, _)| mode);
        let mut merged: Vec<(ModeLabel, u32)> = Vec::with_capacity(occupations.len());
        for (mode, n) in occupations {
            match merged.last_mut() {
                Some((last, count)) if *last == mode => *count += n,
                _ => merged.push((mode, n)),
            }
        }
        OccupationConfig { occupations: merged }
    }

    /// One photon per listed mode; repeated modes accumulate.
    pub fn from_modes<I>(modes: I) -> Self
    where
        I: IntoIterator<Item = ModeLabel>,
    {
        Self::from_counts(modes.into_iter().map(|m| (m, 1)))
    }

    pub fn single(mode: ModeLabel) -> Self {
        OccupationConfig {
            occupations: vec![(mode, 1)],
        }
    }

    pub fn total(&self) -> u32 {
        self.occupations.iter().map(|&(_, n)| n).sum()
    }

    pub fn count(&self, mode: &ModeLabel) -> u32 {
        self.occupations
            .binary_search_by(|(m, _)| m.cmp(mode))
            .map(|i| self.occupations[i].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeLabel, u32)> + '_ {
        self.occupations.iter().copied()
    }

    pub fn is_vacuum(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn rails(&self) -> BTreeSet<Rail> {
        self.occupations.iter().map(|(m, _)| m.rail).collect()
    }

    /// Splits into the part living on `rails` and the rest.
    pub fn partition(&self, rails: &BTreeSet<Rail>) -> (OccupationConfig, OccupationConfig) {
        let (inside, outside): (Vec<_>, Vec<_>) = self.occupations.iter().partition(|(m, _)| rails.contains(&m.rail));
        (
            OccupationConfig { occupations: inside },
            OccupationConfig { occupations: outside },
        )
    }

    /// Union of two configurations, adding counts on shared modes.
    pub fn merged(&self, other: &OccupationConfig) -> OccupationConfig {
        Self::from_counts(self.iter().chain(other.iter()))
    }

    /// Relabels every mode through `f`, accumulating counts on collisions.
    pub fn map_modes<F>(&self, f: F) -> OccupationConfig
    where
        F: Fn(ModeLabel) -> ModeLabel,
    {
        Self::from_counts(self.iter().map(|(m, n)| (f(m), n)))
    }

    /// `prod_m sqrt(n_m!)`, the norm of the unnormalized monomial
    /// `prod_m (a_m^dagger)^{n_m} |0>`.
    pub fn monomial_norm(&self) -> f64 {
        self.occupations
            .iter()
            .map(|&(_, n)| (1..=n).map(f64::from).product::<f64>().sqrt())
            .product()
    }
}

impl fmt::Display for OccupationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, (mode, n)) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *n > 1 {
                write!(f, "{n}")?;
            }
            write!(f, "{mode}")?;
        }
        write!(f, "⟩")
    }
}
