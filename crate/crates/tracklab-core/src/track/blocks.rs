//! Block decomposition of the transition structure of the invariant track.
//!
//! The track map acts block-triangularly: real edges map over real edges
//! (the nonnegative transition matrix), each real edge's image is carried by
//! one chord per junction passage (the sparse real-to-infinitesimal rows),
//! and chords map to chords (the chord map).

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::graph::{solve_arrangement, NestingError, ThickMapSystem};
use crate::spectral::{transition_matrix, NonnegIntMatrix};

use super::chord::ChordId;
use super::push::InvariantTrack;
use super::TrackError;

#[derive(Debug, Clone)]
pub struct TrackBlocks {
    /// Crossing counts of real edges by the edge-image paths.
    pub real: NonnegIntMatrix,
    /// Row per chord carrying at least one passage: entry `j` counts the
    /// passages of edge `j`'s image carried by that chord.
    pub infinitesimal: BTreeMap<ChordId, Vec<u64>>,
    /// Chord map on the materialized chords.
    pub sigma: BTreeMap<ChordId, ChordId>,
}

impl TrackBlocks {
    pub fn to_json(&self, sys: &ThickMapSystem) -> Value {
        let rows: Vec<Value> = self
            .infinitesimal
            .iter()
            .map(|(id, counts)| json!({ "chord": id.0, "counts": counts }))
            .collect();
        let sigma: BTreeMap<String, u32> = self
            .sigma
            .iter()
            .map(|(k, v)| (k.0.to_string(), v.0))
            .collect();
        let _ = sys;
        json!({
            "real": self.real,
            "infinitesimal": rows,
            "sigma": sigma,
        })
    }
}

/// Extract the blocks from a materialized invariant track.
pub fn track_blocks(
    sys: &ThickMapSystem,
    inv: &InvariantTrack,
) -> Result<TrackBlocks, TrackError> {
    let arr = solve_arrangement(sys).map_err(NestingError::from)?;
    let passages = arr.passages();
    if inv.strand_reps.len() != passages.len() {
        return Err(TrackError::ShallowTruncation);
    }
    let mut infinitesimal: BTreeMap<ChordId, Vec<u64>> = BTreeMap::new();
    let nstrips = sys.graph.strips.len();
    for (i, p) in passages.iter().enumerate() {
        let row = infinitesimal
            .entry(inv.strand_reps[i])
            .or_insert_with(|| vec![0; nstrips]);
        row[p.strip.0] += 1;
    }
    Ok(TrackBlocks {
        real: transition_matrix(sys),
        infinitesimal,
        sigma: inv.sigma.clone(),
    })
}
