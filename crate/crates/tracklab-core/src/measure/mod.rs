//! Transverse weights on the invariant train track.
//!
//! The real edges carry the Perron heights; each materialized chord carries
//! the mass that the strand rows feed into it, damped geometrically along
//! the chord map.  [`complete_weights`] sums that series to a finite depth
//! with an explicit tail bound, [`check_switch_conditions`] verifies the
//! branch-sum identities at every gate, and [`exact_weights`] replays the
//! computation over the rationals when the growth rate is a certified
//! integer and the track is finite.

mod exact;
mod weights;

pub use exact::{exact_weights, ExactWeights};
pub use weights::{
    check_switch_conditions, complete_weights, SwitchReport, SwitchResidual, WeightAssignment,
};

use thiserror::Error;

/// Errors from weight completion and the exact rational mode.
#[derive(Debug, Error)]
pub enum MeasureError {
    /// The damping series only converges for growth rates above 1.
    #[error("growth rate {lambda} does not exceed 1; chord weights have no geometric decay")]
    NonExpanding { lambda: f64 },
    /// Exact weights are only defined once push-forward has stabilized.
    #[error("track is not finite; exact rational weights need a stabilized chord set")]
    InfiniteTrack,
    /// The real block has no one-dimensional kernel at the integer rate.
    #[error("kernel of the real block at rate {lambda} has dimension {dim}; expected 1")]
    DegenerateKernel { lambda: u64, dim: usize },
}
