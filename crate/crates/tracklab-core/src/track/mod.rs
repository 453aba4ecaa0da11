//! Generalized train tracks: the initial track, push-forward with
//! parallel-edge removal, the invariant track and its orbit structure, the
//! polygon census, transition blocks, and the classification of 1-pronged
//! singularity orbits.

mod blocks;
mod census;
mod chord;
mod prongs;
mod push;

pub use blocks::{track_blocks, TrackBlocks};
pub use census::{ngon_census, GonKind, GonOrbit, GonRef, LimitKind, NGonCensus};
pub use chord::{Chord, ChordId, TrainTrack};
pub use prongs::{one_prong_orbits, ProngClassification, ProngEntry, ProngOutcome, ProngPoint};
pub use push::{
    default_period_max, initial_track, invariant_track, push_forward, InvariantTrack, PushStep,
};

use thiserror::Error;

use crate::graph::NestingError;

#[derive(Debug, Error)]
pub enum TrackError {
    #[error(transparent)]
    Nesting(#[from] NestingError),
    #[error("push-forward needs the depth-1 picture; derive the nesting to depth ≥ 1")]
    InsufficientNesting,
    #[error(
        "no stabilization and no layer period ≤ {period_max} detected within depth {depth}"
    )]
    Inconclusive { depth: usize, period_max: u32 },
    #[error("materialized track too shallow to determine the infinitesimal transition rows")]
    ShallowTruncation,
    #[error("backward orbit unresolved after {max_steps} steps")]
    StepsExhausted { max_steps: usize },
}
