//! Critical points of the induced graph map.
//!
//! A point of the quotient graph is critical when the induced map fails to be
//! a local homeomorphism there.  Two kinds occur: a vertex at which two edge
//! germs fold onto the same image germ, and an interior fold where an edge
//! image path immediately retraces a step.

use super::path::EdgeStep;
use super::system::{JunctionIdx, StripIdx, ThickMapSystem};

/// A directed edge germ: the end of a strip's core edge at one of its
/// vertices.  `end` is 0 or 1, matching [`Strip::ends`](super::Strip).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Germ {
    pub strip: StripIdx,
    pub end: u8,
}

/// Where the induced map fails to be locally injective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CriticalLocus {
    /// Two or more germs at this vertex share an image germ.
    VertexFold { junction: JunctionIdx },
    /// The image path of `strip` reverses between steps `index` and
    /// `index + 1`; the critical point is the interior preimage of the
    /// junction visited between those steps.
    InteriorFold { strip: StripIdx, index: usize },
}

fn initial_germ(step: EdgeStep) -> Germ {
    Germ {
        strip: step.strip,
        end: if step.forward { 0 } else { 1 },
    }
}

fn terminal_germ(step: EdgeStep) -> Germ {
    Germ {
        strip: step.strip,
        end: if step.forward { 1 } else { 0 },
    }
}

/// Image of a germ under the induced map: the germ along which the edge's
/// image path departs (end 0) or arrives (end 1).
pub fn germ_image(sys: &ThickMapSystem, germ: Germ) -> Germ {
    let path = &sys.edge_image[germ.strip.0];
    if germ.end == 0 {
        initial_germ(path.steps[0])
    } else {
        terminal_germ(*path.steps.last().unwrap())
    }
}

/// All critical loci: vertex folds first (by junction index), then interior
/// folds (by strip index, then position).
pub fn critical_points(sys: &ThickMapSystem) -> Vec<CriticalLocus> {
    let g = &sys.graph;
    let mut out = Vec::new();
    for j in 0..g.junctions.len() {
        let germs: Vec<Germ> = g
            .junction(JunctionIdx(j))
            .boundary
            .iter()
            .map(|&gx| {
                let gate = g.gate(gx);
                Germ {
                    strip: gate.strip,
                    end: gate.end,
                }
            })
            .collect();
        let mut images: Vec<Germ> = germs.iter().map(|&gm| germ_image(sys, gm)).collect();
        images.sort();
        if images.windows(2).any(|w| w[0] == w[1]) {
            out.push(CriticalLocus::VertexFold {
                junction: JunctionIdx(j),
            });
        }
    }
    for e in 0..g.strips.len() {
        let steps = &sys.edge_image[e].steps;
        for i in 0..steps.len().saturating_sub(1) {
            if steps[i + 1] == steps[i].reversed() {
                out.push(CriticalLocus::InteriorFold {
                    strip: StripIdx(e),
                    index: i,
                });
            }
        }
    }
    out
}
