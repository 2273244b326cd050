//! Mapping click patterns to heralded outcomes.

use super::{tables, ClickPattern, DetectionError, FeedForward, Label};
use crate::circuits::Protocol;
use crate::fock::TimeBin;

/// Classifies a click pattern.
///
/// Bell and three-party GHZ patterns are looked up in the reference tables;
/// larger GHZ protocols use [`classify_by_rule`]. Only detector indices and
/// time tags are consulted, never photon numbers.
pub fn classify(pattern: &ClickPattern, protocol: Protocol) -> Result<(Label, FeedForward), DetectionError> {
    match tables::golden_table(protocol) {
        Some(table) => table
            .iter()
            .find(|r| &r.clicks() == pattern)
            .map(|r| (r.label, r.label.feedforward()))
            .ok_or_else(|| DetectionError::Unreachable {
                pattern: pattern.to_string(),
                protocol,
                reason: "not a listed signature".into(),
            }),
        None => classify_by_rule(pattern, protocol.parties()),
    }
}

/// The signature rule for any number of parties.
///
/// Detectors `D1..D4` sit behind the delayed rails `A` (Alice: D1, D2) and
/// `B'` (Bob: D3, D4). Two clicks separated by one time interval herald
/// success; simultaneous clicks herald the recyclable state. The base sign
/// is `+` for a success pair seen by one party or a single recyclable click,
/// and `-` for a success pair split across parties or two recyclable clicks.
/// Each further primed rail contributes exactly one untagged click, and
/// every click on a reflected (V) port, which carries the odd index there,
/// flips the sign.
pub fn classify_by_rule(pattern: &ClickPattern, parties: u8) -> Result<(Label, FeedForward), DetectionError> {
    let unreachable = |reason: &str| DetectionError::Unreachable {
        pattern: pattern.to_string(),
        protocol: Protocol::Ghz(parties),
        reason: reason.into(),
    };
    let max_id = 2 * parties;
    if let Some(&(id, _)) = pattern.iter().find(|(id, _)| *id == 0 || *id > max_id) {
        return Err(unreachable(&format!("detector D{id} does not exist")));
    }

    let mut flips = 0usize;
    for rail in 2..parties {
        let (v_port, h_port) = (2 * rail + 1, 2 * rail + 2);
        let clicks: Vec<_> = pattern
            .iter()
            .filter(|(id, _)| *id == v_port || *id == h_port)
            .collect();
        match clicks.as_slice() {
            [(id, TimeBin::Untagged)] => {
                if *id == v_port {
                    flips += 1;
                }
            }
            [] => return Err(unreachable(&format!("no click behind D{v_port}/D{h_port}"))),
            _ => return Err(unreachable(&format!("more than one click behind D{v_port}/D{h_port}"))),
        }
    }

    let delayed: Vec<(u8, TimeBin)> = pattern.iter().filter(|(id, _)| *id <= 4).copied().collect();
    let party = |id: u8| (id - 1) / 2;
    let (success, base_plus) = if delayed.iter().all(|(_, bin)| *bin == TimeBin::Untagged) {
        match delayed.as_slice() {
            [_] => (false, true),
            [(a, _), (b, _)] if party(*a) == party(*b) => (false, false),
            [] => return Err(unreachable("no click behind D1..D4")),
            _ => return Err(unreachable("simultaneous clicks on both parties' detectors")),
        }
    } else {
        let early: Vec<u8> = delayed
            .iter()
            .filter(|(_, b)| *b == TimeBin::T0)
            .map(|(id, _)| *id)
            .collect();
        let late: Vec<u8> = delayed
            .iter()
            .filter(|(_, b)| *b == TimeBin::T1)
            .map(|(id, _)| *id)
            .collect();
        match (early.as_slice(), late.as_slice()) {
            ([a], [b]) if delayed.len() == 2 => (true, party(*a) == party(*b)),
            _ => return Err(unreachable("time-tagged clicks are not one early and one late")),
        }
    };

    let plus = base_plus ^ (flips % 2 == 1);
    let label = match (success, plus) {
        (true, true) => Label::SuccessPlus,
        (true, false) => Label::SuccessMinus,
        (false, true) => Label::RecyclablePlus,
        (false, false) => Label::RecyclableMinus,
    };
    Ok((label, label.feedforward()))
}
