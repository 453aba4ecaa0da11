//! Indexed in-memory representation of a thick graph map system.

use std::fmt;

use super::path::{EdgePath, EdgeStep};

/// Index of a junction in [`RibbonGraph::junctions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JunctionIdx(pub usize);

/// Index of a strip (real edge) in [`RibbonGraph::strips`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StripIdx(pub usize);

/// Index of a gate in [`RibbonGraph::gates`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GateIdx(pub usize);

impl fmt::Display for JunctionIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J{}", self.0)
    }
}

impl fmt::Display for StripIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", self.0)
    }
}

impl fmt::Display for GateIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}", self.0)
    }
}

/// A marked point attached to a junction: a ray from the free gap that
/// follows `attach_after` (counterclockwise) to an attracting periodic point
/// in the junction interior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedPoint {
    /// Gate whose following free gap hosts the ray attachment.
    pub attach_after: GateIdx,
    /// Label of the periodic orbit this marked point belongs to.
    pub orbit: String,
}

/// A junction: a disk whose boundary carries gates in counterclockwise
/// cyclic order, with free gaps between consecutive gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Junction {
    pub name: String,
    /// Gates in positive (counterclockwise) cyclic order.
    pub boundary: Vec<GateIdx>,
    pub marked: Option<MarkedPoint>,
}

/// A strip (band): the thickening of a real edge, attached at two gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strip {
    pub name: String,
    /// Gates at end 0 and end 1 of the strip.
    pub ends: [GateIdx; 2],
}

/// One gate: a boundary arc of a junction where a particular strip end
/// attaches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub name: String,
    pub junction: JunctionIdx,
    /// Position of this gate in its junction's cyclic boundary list.
    pub boundary_pos: usize,
    pub strip: StripIdx,
    /// Which end of the strip this gate is (0 or 1).
    pub end: u8,
}

/// The static thick graph: junctions, strips, gates, and the declared genus
/// of the ambient closed surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RibbonGraph {
    pub junctions: Vec<Junction>,
    pub strips: Vec<Strip>,
    pub gates: Vec<Gate>,
    pub genus: u32,
}

impl RibbonGraph {
    pub fn junction(&self, j: JunctionIdx) -> &Junction {
        &self.junctions[j.0]
    }

    pub fn strip(&self, s: StripIdx) -> &Strip {
        &self.strips[s.0]
    }

    pub fn gate(&self, g: GateIdx) -> &Gate {
        &self.gates[g.0]
    }

    /// The gate at the other end of the same strip.
    pub fn partner(&self, g: GateIdx) -> GateIdx {
        let gate = self.gate(g);
        let strip = self.strip(gate.strip);
        if strip.ends[0] == g {
            strip.ends[1]
        } else {
            strip.ends[0]
        }
    }

    /// Gate at which a step enters its strip (on the step's initial junction).
    pub fn step_initial_gate(&self, step: EdgeStep) -> GateIdx {
        let strip = self.strip(step.strip);
        if step.forward {
            strip.ends[0]
        } else {
            strip.ends[1]
        }
    }

    /// Gate at which a step leaves its strip (on the step's terminal junction).
    pub fn step_terminal_gate(&self, step: EdgeStep) -> GateIdx {
        let strip = self.strip(step.strip);
        if step.forward {
            strip.ends[1]
        } else {
            strip.ends[0]
        }
    }

    /// Junction a step starts from.
    pub fn step_initial_junction(&self, step: EdgeStep) -> JunctionIdx {
        self.gate(self.step_initial_gate(step)).junction
    }

    /// Junction a step arrives at.
    pub fn step_terminal_junction(&self, step: EdgeStep) -> JunctionIdx {
        self.gate(self.step_terminal_gate(step)).junction
    }

    /// Number of gates on the boundary of junction `j`.
    pub fn valence(&self, j: JunctionIdx) -> usize {
        self.junction(j).boundary.len()
    }

    /// Cyclic distance from gate `from` to gate `to` counterclockwise around
    /// their (shared) junction boundary: 0 for the same gate, else the number
    /// of counterclockwise steps.
    pub fn ccw_distance(&self, from: GateIdx, to: GateIdx) -> usize {
        let a = self.gate(from);
        let b = self.gate(to);
        debug_assert_eq!(a.junction, b.junction);
        let k = self.valence(a.junction);
        (b.boundary_pos + k - a.boundary_pos) % k
    }
}

/// A declared depth-1 strand in a junction picture: the visible portion of
/// some edge image passing through the junction, entering and leaving through
/// the recorded gates (equal gates for a turn), with its rank among strands
/// sharing the same unordered gate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrandDecl {
    pub entry: GateIdx,
    pub exit: GateIdx,
    pub rank: u32,
}

/// A declared attracting periodic orbit of marked points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitDecl {
    pub label: String,
    pub period: u32,
}

/// A Markov thick graph map: the static graph plus the induced dynamics and
/// the junction-level picture data that pins the planar arrangement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThickMapSystem {
    pub graph: RibbonGraph,
    /// Image junction of each junction.
    pub junction_image: Vec<JunctionIdx>,
    /// Image path of each strip's core edge.
    pub edge_image: Vec<EdgePath>,
    /// Declared depth-1 strands per junction (may be empty for junctions no
    /// image path passes through).
    pub pictures: Vec<Vec<StrandDecl>>,
    pub orbits: Vec<OrbitDecl>,
}

impl ThickMapSystem {
    /// The induced map on gates.  The gate at end 0 of a strip maps to the
    /// initial gate of the first step of that strip's image path; the gate at
    /// end 1 maps to the terminal gate of the last step.
    ///
    /// Panics if the image path is empty (ruled out by validation).
    pub fn gate_image(&self, g: GateIdx) -> GateIdx {
        let gate = self.graph.gate(g);
        let path = &self.edge_image[gate.strip.0];
        if gate.end == 0 {
            self.graph.step_initial_gate(path.steps[0])
        } else {
            self.graph.step_terminal_gate(*path.steps.last().unwrap())
        }
    }

    /// Image path of a step: the strip's image path, reversed when the step
    /// traverses the strip backwards.
    pub fn step_image(&self, step: EdgeStep) -> EdgePath {
        let path = &self.edge_image[step.strip.0];
        if step.forward {
            path.clone()
        } else {
            path.reversed()
        }
    }

    /// Image of a path under the induced graph map, by step substitution.
    pub fn path_image(&self, path: &EdgePath) -> EdgePath {
        let mut steps = Vec::new();
        for &step in &path.steps {
            steps.extend(self.step_image(step).steps);
        }
        EdgePath { steps }
    }

    /// Image path of a strip under the n-th iterate of the induced map.
    pub fn iterated_edge_image(&self, s: StripIdx, n: u32) -> EdgePath {
        let mut path = EdgePath {
            steps: vec![EdgeStep {
                strip: s,
                forward: true,
            }],
        };
        for _ in 0..n {
            path = self.path_image(&path);
        }
        path
    }

    /// Least common multiple of the declared orbit periods (1 if none).
    pub fn orbit_period_lcm(&self) -> u32 {
        fn gcd(a: u32, b: u32) -> u32 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.orbits
            .iter()
            .map(|o| o.period.max(1))
            .fold(1u32, |acc, p| acc / gcd(acc, p) * p)
    }

    /// The marked-orbit predecessor of a junction: the unique marked junction
    /// whose image is `j`, if `j` itself is marked.  Marked junctions form
    /// attracting periodic orbits, so within each orbit the image map is a
    /// cyclic permutation.
    pub fn marked_predecessor(&self, j: JunctionIdx) -> Option<JunctionIdx> {
        self.graph.junction(j).marked.as_ref()?;
        (0..self.graph.junctions.len())
            .map(JunctionIdx)
            .find(|&p| self.graph.junction(p).marked.is_some() && self.junction_image[p.0] == j)
    }
}
