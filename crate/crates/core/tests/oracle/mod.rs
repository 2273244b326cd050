//! Brute-force reference for the pre-measurement state.
//!
//! Written without the engine's transform or state types: each creation
//! operator of the less-entangled input is pushed through the optical
//! network as a single-photon path sum, products are multiplied out into
//! raw operator words (nothing is merged until the end), and only then are
//! equal words collected and the bosonic `sqrt(n!)` factors applied.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use timebin_ecp::fock::{ModeLabel, OccupationConfig, Polarization, Rail, TimeBin};

/// Where a photon can be: a party rail (index, primed) or a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    Party(u8, bool),
    Det(u8),
}

/// `(place, vertical?, time bin 0 = none, 1 = early, 2 = late)`.
pub type Mode = (Place, bool, u8);

type Path = Vec<(Mode, C64)>;

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn step(path: Path, f: impl Fn(Mode) -> Path) -> Path {
    path.into_iter()
        .flat_map(|(m, c)| f(m).into_iter().map(move |(m2, c2)| (m2, c * c2)))
        .collect()
}

/// Image of one input creation operator under the full `parties`-party
/// network.
pub fn propagate(parties: u8, start: Mode) -> Path {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut path = vec![(start, r(1.0))];

    // 50:50 beam splitter between A and B'.
    path = step(path, |(p, v, t)| match p {
        Place::Party(0, false) => vec![
            ((Place::Party(0, false), v, t), r(s)),
            ((Place::Party(1, true), v, t), r(s)),
        ],
        Place::Party(1, true) => vec![
            ((Place::Party(0, false), v, t), r(-s)),
            ((Place::Party(1, true), v, t), r(s)),
        ],
        _ => vec![((p, v, t), r(1.0))],
    });
    // Half-wave plate at 45 degrees on A'.
    path = step(path, |(p, v, t)| match p {
        Place::Party(0, true) => vec![((p, !v, t), r(1.0))],
        _ => vec![((p, v, t), r(1.0))],
    });
    // Delay lines on A and B': early for H, late for V.
    path = step(path, |(p, v, t)| match p {
        Place::Party(0, false) | Place::Party(1, true) => vec![((p, v, if v { 2 } else { 1 }), r(1.0))],
        _ => vec![((p, v, t), r(1.0))],
    });
    let measured = |p: Place| matches!(p, Place::Party(0, false)) || matches!(p, Place::Party(k, true) if k >= 1);
    // Hadamard wave plates on every measured rail.
    path = step(path, |(p, v, t)| {
        if measured(p) {
            if v {
                vec![((p, false, t), r(s)), ((p, true, t), r(-s))]
            } else {
                vec![((p, false, t), r(s)), ((p, true, t), r(s))]
            }
        } else {
            vec![((p, v, t), r(1.0))]
        }
    });
    // Polarizing beam splitters onto the detectors.
    path = step(path, |(p, v, t)| {
        let det = match p {
            Place::Party(0, false) => Some(if v { 2 } else { 1 }),
            Place::Party(1, true) => Some(if v { 4 } else { 3 }),
            Place::Party(k, true) if k >= 2 && k < parties => Some(if v { 2 * k + 1 } else { 2 * k + 2 }),
            _ => None,
        };
        match det {
            Some(d) => vec![((Place::Det(d), v, t), r(1.0))],
            None => vec![((p, v, t), r(1.0))],
        }
    });
    path
}

/// Operator words of `alpha |H..H> + beta |V..V>` on both source families.
fn input_words(parties: u8, alpha: C64, beta: C64) -> Vec<(Vec<Mode>, C64)> {
    let family = |primed: bool| -> Vec<(Vec<Mode>, C64)> {
        [(false, alpha), (true, beta)]
            .into_iter()
            .map(|(v, c)| ((0..parties).map(|k| (Place::Party(k, primed), v, 0u8)).collect(), c))
            .collect()
    };
    let mut words = Vec::new();
    for (w1, c1) in family(false) {
        for (w2, c2) in family(true) {
            words.push(([w1.clone(), w2].concat(), c1 * c2));
        }
    }
    words
}

/// Amplitudes of the state reaching the detectors, keyed by the sorted list
/// of occupied modes with their counts.
pub fn premeasurement(parties: u8, alpha: C64, beta: C64) -> BTreeMap<Vec<(Mode, u32)>, C64> {
    let mut expanded: Vec<(Vec<Mode>, C64)> = Vec::new();
    for (word, coeff) in input_words(parties, alpha, beta) {
        let mut partial: Vec<(Vec<Mode>, C64)> = vec![(Vec::new(), coeff)];
        for op in word {
            let image = propagate(parties, op);
            partial = partial
                .into_iter()
                .flat_map(|(w, c)| {
                    image.iter().map(move |(m, k)| {
                        let mut w2 = w.clone();
                        w2.push(*m);
                        (w2, c * k)
                    })
                })
                .collect();
        }
        expanded.extend(partial);
    }

    let mut out: BTreeMap<Vec<(Mode, u32)>, C64> = BTreeMap::new();
    for (mut word, c) in expanded {
        word.sort();
        let mut counts: Vec<(Mode, u32)> = Vec::new();
        for m in word {
            match counts.last_mut() {
                Some((last, n)) if *last == m => *n += 1,
                _ => counts.push((m, 1)),
            }
        }
        *out.entry(counts).or_default() += c;
    }
    for (counts, amp) in out.iter_mut() {
        let factorials: f64 = counts.iter().map(|(_, n)| (1..=*n).product::<u32>() as f64).product();
        *amp *= factorials.sqrt();
    }
    out.retain(|_, a| a.norm() > 1e-14);
    out
}

pub fn to_engine(counts: &[(Mode, u32)]) -> OccupationConfig {
    OccupationConfig::from_counts(counts.iter().map(|&((place, v, t), n)| {
        let rail = match place {
            Place::Party(index, primed) => Rail::Party { index, primed },
            Place::Det(d) => Rail::detector(d),
        };
        let pol = if v { Polarization::V } else { Polarization::H };
        let bin = [TimeBin::Untagged, TimeBin::T0, TimeBin::T1][t as usize];
        (ModeLabel::new(rail, pol, bin), n)
    }))
}
