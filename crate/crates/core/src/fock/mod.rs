//! Second-quantized photonic states and the engine that pushes them through
//! linear optics.

mod mode;
mod state;
mod transform;

use thiserror::Error;

pub use mode::{ModeLabel, OccupationConfig, Polarization, Rail, TimeBin};
pub use state::{PhotonicState, DEFAULT_PRUNE_EPSILON};
pub use transform::{ModeTransform, UNITARY_TOLERANCE};

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("non-finite coefficient in the column of {0}")]
    NonFiniteCoefficient(ModeLabel),

    #[error("non-finite amplitude")]
    NonFiniteAmplitude,

    #[error("state mixes photon numbers {expected} and {found}")]
    MixedPhotonTotals { expected: u32, found: u32 },

    #[error("rail {0} is occupied in both factors of a tensor product")]
    OverlappingRails(Rail),

    #[error("columns are not orthonormal (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("projection pattern touches unmeasured rail {0}")]
    ProjectionOnKeptRail(Rail),
}
