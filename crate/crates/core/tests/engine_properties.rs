use std::collections::BTreeSet;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use timebin_ecp::elements::{beam_splitter, hwp, pbs, sigma_z, time_delay};
use timebin_ecp::fock::{ModeLabel, ModeTransform, OccupationConfig, PhotonicState, Polarization, Rail, TimeBin};

const RAILS: [Rail; 4] = [Rail::A, Rail::B, Rail::A_PRIME, Rail::B_PRIME];

fn mode(i: usize) -> ModeLabel {
    let pol = if i.is_multiple_of(2) {
        Polarization::H
    } else {
        Polarization::V
    };
    ModeLabel::untagged(RAILS[i / 2], pol)
}

fn catalog() -> Vec<(&'static str, ModeTransform)> {
    vec![
        ("bs", beam_splitter(Rail::A, Rail::B_PRIME).unwrap()),
        ("bs-kept", beam_splitter(Rail::B, Rail::A_PRIME).unwrap()),
        ("pbs", pbs(&[Rail::A], &[Rail::detector(1), Rail::detector(2)]).unwrap()),
        (
            "pbs-two-inputs",
            pbs(&[Rail::A, Rail::B], &[Rail::detector(1), Rail::detector(2)]).unwrap(),
        ),
        ("hwp0", hwp(Rail::A, 0.0).unwrap()),
        ("hwp22.5", hwp(Rail::B_PRIME, 22.5).unwrap()),
        ("hwp45", hwp(Rail::A_PRIME, 45.0).unwrap()),
        ("sigma_z", sigma_z(Rail::B)),
        ("delay", time_delay(Rail::A)),
    ]
}

/// Normalized states of `n <= 8` photons on the untagged modes of A, B, A', B'.
fn random_state() -> impl Strategy<Value = PhotonicState> {
    (1usize..=8)
        .prop_flat_map(|n| {
            prop::collection::vec((prop::collection::vec(0usize..8, n), -1.0f64..1.0, -1.0f64..1.0), 1..6)
        })
        .prop_filter_map("zero state", |terms| {
            let state = PhotonicState::from_terms(terms.into_iter().map(|(modes, re, im)| {
                (
                    OccupationConfig::from_modes(modes.into_iter().map(mode)),
                    C64::new(re, im),
                )
            }))
            .ok()?;
            (state.norm() > 1e-3).then(|| state.normalized())
        })
}

/// Largest amplitude difference over the union of supports.
fn distance(a: &PhotonicState, b: &PhotonicState) -> f64 {
    let configs: BTreeSet<OccupationConfig> = a.terms().chain(b.terms()).map(|(c, _)| c.clone()).collect();
    configs
        .iter()
        .map(|c| (a.amplitude(c) - b.amplitude(c)).norm())
        .fold(0.0, f64::max)
}

#[test]
fn catalog_elements_are_unitary() {
    for (name, t) in catalog() {
        assert!(t.is_unitary(), "{name}");
        assert!(
            t.orthonormality_defect() < 1e-12,
            "{name}: {}",
            t.orthonormality_defect()
        );
    }
}

#[test]
fn hom_coincidence_cancels_exactly() {
    for pol in Polarization::BOTH {
        for bin in TimeBin::ALL {
            let a = ModeLabel::new(Rail::A, pol, bin);
            let b = ModeLabel::new(Rail::B_PRIME, pol, bin);
            let input = PhotonicState::single(OccupationConfig::from_modes([a, b]));
            let out = input.apply(&beam_splitter(Rail::A, Rail::B_PRIME).unwrap()).unwrap();
            assert_eq!(out.amplitude(&OccupationConfig::from_modes([a, b])), C64::new(0.0, 0.0));
            assert_eq!(out.len(), 2, "{out}");
            assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn distinguishable_photons_do_not_bunch() {
    let a = ModeLabel::untagged(Rail::A, Polarization::H);
    let b = ModeLabel::untagged(Rail::B_PRIME, Polarization::V);
    let out = PhotonicState::single(OccupationConfig::from_modes([a, b]))
        .apply(&beam_splitter(Rail::A, Rail::B_PRIME).unwrap())
        .unwrap();
    assert!((out.amplitude(&OccupationConfig::from_modes([a, b])).norm_sqr() - 0.25).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_elements_preserve_norm(state in random_state()) {
        for (name, t) in catalog() {
            let out = state.apply(&t).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10, "{}: {}", name, out.norm_sqr());
        }
    }

    #[test]
    fn composition_matches_sequential_application(state in random_state(), i in 0usize..9, j in 0usize..9) {
        let cat = catalog();
        // A delay after a delay on the same rail is outside its domain.
        prop_assume!(!(cat[i].0 == "delay" && cat[j].0 == "delay"));
        let (t1, t2) = (&cat[i].1, &cat[j].1);
        let sequential = state.apply(t1).unwrap().apply(t2).unwrap();
        let composed = state.apply(&t1.then(t2)).unwrap();
        prop_assert!(distance(&sequential, &composed) < 1e-12);
    }

    #[test]
    fn self_inverse_elements(state in random_state()) {
        for t in [hwp(Rail::A_PRIME, 45.0).unwrap(), sigma_z(Rail::B), hwp(Rail::A, 22.5).unwrap()] {
            let twice = state.apply(&t).unwrap().apply(&t).unwrap();
            prop_assert!(distance(&twice, &state) < 1e-12);
        }
        let bs = beam_splitter(Rail::A, Rail::B_PRIME).unwrap();
        let round_trip = state.apply(&bs).unwrap().apply(&bs.adjoint()).unwrap();
        prop_assert!(distance(&round_trip, &state) < 1e-12);
    }

    #[test]
    fn disjoint_elements_commute(state in random_state()) {
        let pairs = [
            (beam_splitter(Rail::A, Rail::B_PRIME).unwrap(), hwp(Rail::A_PRIME, 22.5).unwrap()),
            (sigma_z(Rail::B), time_delay(Rail::A)),
            (hwp(Rail::A, 45.0).unwrap(), beam_splitter(Rail::B, Rail::A_PRIME).unwrap()),
        ];
        for (x, y) in &pairs {
            let xy = state.apply(x).unwrap().apply(y).unwrap();
            let yx = state.apply(y).unwrap().apply(x).unwrap();
            prop_assert!(distance(&xy, &yx) < 1e-12);
        }
    }

    #[test]
    fn complete_projections_sum_to_one(state in random_state(), mask in 1u8..16) {
        let measured: BTreeSet<Rail> = RAILS.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, r)| *r).collect();
        let total: f64 = state
            .split_on(&measured)
            .keys()
            .map(|fixed| state.project_and_collapse(&measured, fixed).unwrap().1)
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10, "{}", total);
    }
}
