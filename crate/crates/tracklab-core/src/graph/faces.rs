//! Boundary-face tracing for ribbon graphs.
//!
//! Thickening the graph (a disk per junction, a band per strip) produces a
//! surface with boundary; each boundary circle traverses a cyclic sequence of
//! free gaps.  Capping each circle with a disk recovers the closed surface,
//! so the number of face traces enters the Euler characteristic
//! `V − E + F = 2 − 2·genus`.

use super::system::{JunctionIdx, RibbonGraph};

/// One boundary circle, as the cyclic list of gaps it passes through.  A gap
/// `(junction, i)` is the free boundary arc following the `i`-th gate of the
/// junction counterclockwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceTrace {
    pub gaps: Vec<(JunctionIdx, usize)>,
}

/// Successor of a gap along its boundary circle: cross the strip attached at
/// the next gate counterclockwise and continue from the partner gate's gap.
fn gap_successor(g: &RibbonGraph, gap: (JunctionIdx, usize)) -> (JunctionIdx, usize) {
    let (j, i) = gap;
    let k = g.valence(j);
    let next_gate = g.junction(j).boundary[(i + 1) % k];
    let partner = g.partner(next_gate);
    let pg = g.gate(partner);
    (pg.junction, pg.boundary_pos)
}

/// All boundary circles of the thickened graph, each starting from its
/// lexicographically least gap (deterministic output order).
pub fn face_orbits(g: &RibbonGraph) -> Vec<FaceTrace> {
    let mut seen = vec![false; g.gates.len()];
    let mut faces = Vec::new();
    for j in 0..g.junctions.len() {
        for i in 0..g.valence(JunctionIdx(j)) {
            let gate = g.junction(JunctionIdx(j)).boundary[i];
            if seen[gate.0] {
                continue;
            }
            let start = (JunctionIdx(j), i);
            let mut gaps = Vec::new();
            let mut cur = start;
            loop {
                let gate_of_cur = g.junction(cur.0).boundary[cur.1];
                seen[gate_of_cur.0] = true;
                gaps.push(cur);
                cur = gap_successor(g, cur);
                if cur == start {
                    break;
                }
            }
            faces.push(FaceTrace { gaps });
        }
    }
    faces
}

/// Euler characteristic of the closed surface built from the ribbon
/// structure: junctions − strips + boundary faces.
pub fn euler_characteristic(g: &RibbonGraph) -> i64 {
    let v = g.junctions.len() as i64;
    let e = g.strips.len() as i64;
    let f = face_orbits(g).len() as i64;
    v - e + f
}
