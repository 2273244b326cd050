//! Reference detection-signature tables for the Bell and three-party GHZ
//! protocols.
//!
//! Patterns are written as comma-separated clicks. `D3^t1` is detector 3
//! firing in the later of two time bins; a bare `D5` fires with no time
//! interval to the other clicks.

use super::{ClickPattern, Label};
use crate::circuits::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoldenRow {
    pub pattern: &'static str,
    pub label: Label,
}

impl GoldenRow {
    pub fn clicks(&self) -> ClickPattern {
        self.pattern.parse().expect("golden patterns are well formed")
    }
}

const fn row(pattern: &'static str, label: Label) -> GoldenRow {
    GoldenRow { pattern, label }
}

use Label::{RecyclableMinus as RM, RecyclablePlus as RP, SuccessMinus as SM, SuccessPlus as SP};

pub const BELL_TABLE: &[GoldenRow] = &[
    row("D1", RP),
    row("D2", RP),
    row("D3", RP),
    row("D4", RP),
    row("D1,D2", RM),
    row("D3,D4", RM),
    row("D1^t0,D1^t1", SP),
    row("D2^t0,D2^t1", SP),
    row("D3^t0,D3^t1", SP),
    row("D4^t0,D4^t1", SP),
    row("D1^t0,D2^t1", SP),
    row("D1^t1,D2^t0", SP),
    row("D3^t0,D4^t1", SP),
    row("D3^t1,D4^t0", SP),
    row("D1^t0,D3^t1", SM),
    row("D1^t1,D3^t0", SM),
    row("D2^t0,D4^t1", SM),
    row("D2^t1,D4^t0", SM),
    row("D2^t0,D3^t1", SM),
    row("D2^t1,D3^t0", SM),
    row("D1^t0,D4^t1", SM),
    row("D1^t1,D4^t0", SM),
];

pub const GHZ3_TABLE: &[GoldenRow] = &[
    row("D1,D2,D5", RP),
    row("D3,D4,D5", RP),
    row("D1,D6", RP),
    row("D2,D6", RP),
    row("D3,D6", RP),
    row("D4,D6", RP),
    row("D1,D2,D6", RM),
    row("D3,D4,D6", RM),
    row("D1,D5", RM),
    row("D2,D5", RM),
    row("D3,D5", RM),
    row("D4,D5", RM),
    row("D1^t0,D1^t1,D6", SP),
    row("D2^t0,D2^t1,D6", SP),
    row("D3^t0,D3^t1,D6", SP),
    row("D4^t0,D4^t1,D6", SP),
    row("D1^t0,D2^t1,D6", SP),
    row("D1^t1,D2^t0,D6", SP),
    row("D3^t0,D4^t1,D6", SP),
    row("D3^t1,D4^t0,D6", SP),
    row("D1^t0,D3^t1,D5", SP),
    row("D1^t1,D3^t0,D5", SP),
    row("D2^t0,D4^t1,D5", SP),
    row("D2^t1,D4^t0,D5", SP),
    row("D2^t0,D3^t1,D5", SP),
    row("D2^t1,D3^t0,D5", SP),
    row("D1^t0,D4^t1,D5", SP),
    row("D1^t1,D4^t0,D5", SP),
    row("D1^t0,D1^t1,D5", SM),
    row("D2^t0,D2^t1,D5", SM),
    row("D3^t0,D3^t1,D5", SM),
    row("D4^t0,D4^t1,D5", SM),
    row("D1^t0,D2^t1,D5", SM),
    row("D1^t1,D2^t0,D5", SM),
    row("D3^t0,D4^t1,D5", SM),
    row("D3^t1,D4^t0,D5", SM),
    row("D1^t0,D3^t1,D6", SM),
    row("D1^t1,D3^t0,D6", SM),
    row("D2^t0,D4^t1,D6", SM),
    row("D2^t1,D4^t0,D6", SM),
    row("D2^t0,D3^t1,D6", SM),
    row("D2^t1,D3^t0,D6", SM),
    row("D1^t0,D4^t1,D6", SM),
    row("D1^t1,D4^t0,D6", SM),
];

/// The reference table for `protocol`, if there is one.
pub fn golden_table(protocol: Protocol) -> Option<&'static [GoldenRow]> {
    match protocol.parties() {
        2 => Some(BELL_TABLE),
        3 => Some(GHZ3_TABLE),
        _ => None,
    }
}
