//! Directed edge paths through the quotient graph.

use super::system::StripIdx;

/// One directed traversal of a strip's core edge.  `forward` means from end 0
/// to end 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeStep {
    pub strip: StripIdx,
    pub forward: bool,
}

impl EdgeStep {
    pub fn reversed(self) -> EdgeStep {
        EdgeStep {
            strip: self.strip,
            forward: !self.forward,
        }
    }
}

/// A finite directed path in the quotient graph, as a sequence of edge
/// traversals.  Consecutive steps must share a junction (checked by system
/// validation, not by construction).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgePath {
    pub steps: Vec<EdgeStep>,
}

impl EdgePath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> EdgePath {
        EdgePath {
            steps: self.steps.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    /// Number of traversals of the given strip, in either direction.
    pub fn crossings_of(&self, s: StripIdx) -> usize {
        self.steps.iter().filter(|st| st.strip == s).count()
    }
}
