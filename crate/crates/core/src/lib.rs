//! Fock-space simulation of heralded entanglement concentration for
//! less-entangled Bell and GHZ states, using linear optics and a time-bin
//! tag in place of photon-number-resolving detection.
//!
//! The crate is layered bottom-up:
//!
//! - [`fock`]: sparse multi-photon states and the creation-operator engine.
//! - [`elements`]: beam splitters, wave plates, delay lines and the channel.
//! - [`circuits`]: sources and circuit layouts for the Bell and GHZ protocols.
//! - [`detection`]: click patterns, classification, feed-forward, heralding.
//! - [`analysis`]: closed-form probabilities, recycling, sweeps, table checks.
//! - [`cli`]: the `timebin-ecp` command-line front end.

pub mod analysis;
pub mod circuits;
pub mod cli;
pub mod detection;
pub mod elements;
pub mod fock;
