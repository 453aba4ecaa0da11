//! Chords — the infinitesimal edges of a generalized train track — and the
//! isotopy tests that keep a track free of parallel edges.
//!
//! A chord lives inside one junction disk and connects two switch
//! attachments on the boundary; its feet are recorded as boundary
//! [`Address`]es, the same coordinates used for turns.  Two chords with the
//! same junction and gate pair are *parallel* when they cobound a rectangle
//! (for a nested bubble pair, a pinched annulus) containing no foot of any
//! other chord and no marked point; parallel duplicates are removed during
//! push-forward, always keeping the earlier-created chord.

use serde::Serialize;
use serde_json::{json, Value};

use crate::graph::{
    Address, Arrangement, Bound, CirclePoint, GateIdx, JunctionIdx, ThickMapSystem,
};

/// Identifier of a chord, stable across push-forwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ChordId(pub u32);

/// Which foot of a chord.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum FootRole {
    Entry,
    Exit,
}

/// An infinitesimal edge of the track: an embedded arc inside a junction
/// disk between two switch attachments.
#[derive(Debug, Clone)]
pub struct Chord {
    pub id: ChordId,
    pub junction: JunctionIdx,
    pub entry: GateIdx,
    pub exit: GateIdx,
    pub entry_foot: Address,
    pub exit_foot: Address,
    /// Push-forward iterate at which the chord was created (1 = a turn of an
    /// edge-image path).
    pub depth: usize,
    /// Chord whose image produced this one; `None` for layer-1 chords.
    pub parent: Option<ChordId>,
    /// For bubbles: whether the pinched-off disk wraps the junction's marked
    /// point.
    pub encloses_marked: bool,
}

impl Chord {
    /// Both feet on one gate.
    pub fn is_bubble(&self) -> bool {
        self.entry == self.exit
    }

    /// Unordered gate pair, canonically sorted.
    pub fn gate_pair(&self) -> (GateIdx, GateIdx) {
        if self.exit < self.entry {
            (self.exit, self.entry)
        } else {
            (self.entry, self.exit)
        }
    }

    pub(super) fn foot(&self, role: FootRole) -> (GateIdx, &Address) {
        match role {
            FootRole::Entry => (self.entry, &self.entry_foot),
            FootRole::Exit => (self.exit, &self.exit_foot),
        }
    }

    /// Foot roles of a bubble ordered along the gate: (lower, higher).
    pub(super) fn span_roles(&self) -> (FootRole, FootRole) {
        if self.entry_foot <= self.exit_foot {
            (FootRole::Entry, FootRole::Exit)
        } else {
            (FootRole::Exit, FootRole::Entry)
        }
    }

    /// Bubble feet ordered along the gate.
    pub fn span(&self) -> (&Address, &Address) {
        if self.entry_foot <= self.exit_foot {
            (&self.entry_foot, &self.exit_foot)
        } else {
            (&self.exit_foot, &self.entry_foot)
        }
    }

    /// Stable description of the chord's position: junction, gate pair and
    /// foot addresses.  Used as the serialization sort key.
    pub fn signature(&self, sys: &ThickMapSystem) -> String {
        let g = &sys.graph;
        let addr = |a: &Address| {
            a.0.iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        format!(
            "{}:{}>{}:{}|{}",
            g.junction(self.junction).name,
            g.gate(self.entry).name,
            g.gate(self.exit).name,
            addr(&self.entry_foot),
            addr(&self.exit_foot),
        )
    }

    fn to_json(&self, sys: &ThickMapSystem) -> Value {
        let g = &sys.graph;
        json!({
            "id": self.id.0,
            "junction": g.junction(self.junction).name,
            "entry": g.gate(self.entry).name,
            "exit": g.gate(self.exit).name,
            "entry_foot": self.entry_foot.0,
            "exit_foot": self.exit_foot.0,
            "depth": self.depth,
            "parent": self.parent.map(|p| p.0),
            "bubble": self.is_bubble(),
            "encloses_marked": self.encloses_marked,
            "signature": self.signature(sys),
        })
    }
}

/// A generalized train track over a fixed thick graph: the real edges (one
/// per strip, left implicit) plus the materialized chords.
#[derive(Debug, Clone, Default)]
pub struct TrainTrack {
    /// All chords, ascending by id (= creation order).
    chords: Vec<Chord>,
    /// Push-forward iterates applied since the initial track.
    pub depth: usize,
}

impl TrainTrack {
    pub(super) fn new() -> Self {
        TrainTrack::default()
    }

    pub fn chords(&self) -> &[Chord] {
        &self.chords
    }

    pub fn chord(&self, id: ChordId) -> Option<&Chord> {
        self.chords
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.chords[i])
    }

    pub fn chords_at(&self, j: JunctionIdx) -> impl Iterator<Item = &Chord> {
        self.chords.iter().filter(move |c| c.junction == j)
    }

    /// Chords created at push-forward iterate `layer`.
    pub fn layer(&self, layer: usize) -> impl Iterator<Item = &Chord> {
        self.chords.iter().filter(move |c| c.depth == layer)
    }

    pub(super) fn push(&mut self, c: Chord) {
        debug_assert!(self.chords.last().map_or(true, |l| l.id < c.id));
        self.chords.push(c);
    }

    /// JSON description, chords ordered by (depth, junction, signature).
    pub fn to_json(&self, sys: &ThickMapSystem) -> Value {
        let mut ordered: Vec<&Chord> = self.chords.iter().collect();
        ordered.sort_by_key(|c| (c.depth, c.junction.0, c.signature(sys)));
        json!({
            "depth": self.depth,
            "chords": ordered.iter().map(|c| c.to_json(sys)).collect::<Vec<_>>(),
        })
    }
}

/// Ordered chord slice lookup (by id) over any working set.
#[derive(Clone, Copy)]
pub(super) struct ChordSet<'a>(pub &'a [Chord]);

impl<'a> ChordSet<'a> {
    pub fn get(&self, id: ChordId) -> Option<&'a Chord> {
        self.0
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.0[i])
    }
}

pub(super) fn circle_point(
    sys: &ThickMapSystem,
    gate: GateIdx,
    steps: &[usize],
    bound: Bound,
) -> CirclePoint {
    CirclePoint {
        gate_slot: sys.graph.gate(gate).boundary_pos,
        steps: steps.to_vec(),
        bound,
    }
}

/// Is `p` strictly inside the counterclockwise open arc from `from` to `to`?
pub(super) fn in_ccw_arc(p: &CirclePoint, from: &CirclePoint, to: &CirclePoint) -> bool {
    if from < to {
        p > from && p < to
    } else {
        p > from || p < to
    }
}

/// The two boundary arcs of the region between two non-crossing chords with
/// the same junction and gate pair, as counterclockwise (from, to) pairs.
/// `None` when the four feet alternate (crossing) or coincide.
pub(super) fn between_arcs(
    sys: &ThickMapSystem,
    a: &Chord,
    b: &Chord,
) -> Option<[(CirclePoint, CirclePoint); 2]> {
    let mut pts: Vec<(CirclePoint, u8)> = vec![
        (circle_point(sys, a.entry, &a.entry_foot.0, Bound::Point), 0),
        (circle_point(sys, a.exit, &a.exit_foot.0, Bound::Point), 0),
        (circle_point(sys, b.entry, &b.entry_foot.0, Bound::Point), 1),
        (circle_point(sys, b.exit, &b.exit_foot.0, Bound::Point), 1),
    ];
    pts.sort_by(|x, y| x.0.cmp(&y.0));
    for r in 0..4 {
        let owner = |k: usize| pts[(r + k) % 4].1;
        if owner(0) == owner(3) && owner(1) == owner(2) && owner(0) != owner(1) {
            let p = |k: usize| pts[(r + k) % 4].0.clone();
            return Some([(p(0), p(1)), (p(2), p(3))]);
        }
    }
    None
}

fn descends_into<'a>(
    set: &ChordSet<'a>,
    c: &Chord,
    pred: JunctionIdx,
) -> Option<&'a Chord> {
    let p = set.get(c.parent?)?;
    (p.junction == pred).then_some(p)
}

/// Does the side of chord `c` bounded by the counterclockwise arc from its
/// `from` foot to its `to` foot contain the junction's marked point?
///
/// Same descent as for turns: the marked point sits inside the image disk of
/// the marked predecessor junction; a foot landing inside one of that disk's
/// attachment legs sends the question to the parent chord with the same foot
/// roles.
pub(super) fn chord_side_contains_marked(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    set: &ChordSet,
    c: &Chord,
    from: FootRole,
    to: FootRole,
) -> bool {
    let Some(pred) = sys.marked_predecessor(c.junction) else {
        return false;
    };
    let legs: Vec<(GateIdx, usize)> = sys
        .graph
        .junction(pred)
        .boundary
        .iter()
        .map(|&g0| arr.att_position(sys, g0))
        .collect();

    let (fg, fa) = c.foot(from);
    let (tg, ta) = c.foot(to);
    let foot_in_leg = |gate: GateIdx, addr: &Address| {
        legs.iter()
            .any(|&(lg, li)| lg == gate && addr.0.first() == Some(&li))
    };
    if foot_in_leg(fg, fa) || foot_in_leg(tg, ta) {
        let Some(parent) = c.parent.and_then(|p| set.get(p)) else {
            return false;
        };
        return chord_side_contains_marked(sys, arr, set, parent, from, to);
    }

    let start = circle_point(sys, fg, &fa.0, Bound::Point);
    let end = circle_point(sys, tg, &ta.0, Bound::Point);
    let mut any_in = false;
    let mut all_in = true;
    for &(lg, li) in &legs {
        let lo = circle_point(sys, lg, &[li], Bound::Lo);
        let hi = circle_point(sys, lg, &[li], Bound::Hi);
        if in_ccw_arc(&lo, &start, &end) && in_ccw_arc(&hi, &start, &end) {
            any_in = true;
        } else {
            all_in = false;
        }
    }
    any_in && all_in
}

/// Does the open region between two stacked same-pair chords contain the
/// junction's marked point?
///
/// The marked point lives inside the image disk `D` of the junction's marked
/// predecessor `P`.  When both chords dive into `D` (their parents live at
/// `P`), the region meets `D` in the image of the region between the
/// parents; when neither does, `D` lies in the region exactly if all its
/// attachment legs do; when exactly one dives in, the region meets `D` in
/// the image of one side of that chord's parent.
pub(super) fn between_contains_marked(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    set: &ChordSet,
    a: &Chord,
    b: &Chord,
) -> bool {
    let Some(pred) = sys.marked_predecessor(a.junction) else {
        return false;
    };
    let pa = descends_into(set, a, pred);
    let pb = descends_into(set, b, pred);
    match (pa, pb) {
        (Some(pa), Some(pb)) => {
            if pa.junction != pb.junction {
                return false;
            }
            between_contains_marked(sys, arr, set, pa, pb)
        }
        (None, None) => {
            let Some(arcs) = between_arcs(sys, a, b) else {
                return false;
            };
            let legs: Vec<(GateIdx, usize)> = sys
                .graph
                .junction(pred)
                .boundary
                .iter()
                .map(|&g0| arr.att_position(sys, g0))
                .collect();
            let mut all_in = true;
            for &(lg, li) in &legs {
                let lo = circle_point(sys, lg, &[li], Bound::Lo);
                let hi = circle_point(sys, lg, &[li], Bound::Hi);
                let inside = arcs.iter().any(|(f, t)| {
                    in_ccw_arc(&lo, f, t) && in_ccw_arc(&hi, f, t)
                });
                all_in &= inside;
            }
            all_in && !legs.is_empty()
        }
        _ => {
            // Exactly one chord dives into D.
            let (w, v) = if pa.is_some() { (a, b) } else { (b, a) };
            one_dives_case(sys, arr, set, w, v, pred)
        }
    }
}

fn one_dives_case(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    set: &ChordSet,
    w: &Chord,
    v: &Chord,
    pred: JunctionIdx,
) -> bool {
    // The arc side of v that faces w must hold the whole disk D.
    let we = circle_point(sys, w.entry, &w.entry_foot.0, Bound::Point);
    let wx = circle_point(sys, w.exit, &w.exit_foot.0, Bound::Point);
    let ve = circle_point(sys, v.entry, &v.entry_foot.0, Bound::Point);
    let vx = circle_point(sys, v.exit, &v.exit_foot.0, Bound::Point);

    let v_side = if in_ccw_arc(&we, &ve, &vx) && in_ccw_arc(&wx, &ve, &vx) {
        (&ve, &vx)
    } else if in_ccw_arc(&we, &vx, &ve) && in_ccw_arc(&wx, &vx, &ve) {
        (&vx, &ve)
    } else {
        return false;
    };
    let legs: Vec<(GateIdx, usize)> = sys
        .graph
        .junction(pred)
        .boundary
        .iter()
        .map(|&g0| arr.att_position(sys, g0))
        .collect();
    for &(lg, li) in &legs {
        let lo = circle_point(sys, lg, &[li], Bound::Lo);
        let hi = circle_point(sys, lg, &[li], Bound::Hi);
        if !(in_ccw_arc(&lo, v_side.0, v_side.1) && in_ccw_arc(&hi, v_side.0, v_side.1)) {
            return false;
        }
    }

    // Within D, the region is the image of the side of w's parent that faces
    // v: same foot roles, orientation preserved.
    let (from, to) = if in_ccw_arc(&ve, &we, &wx) {
        (FootRole::Entry, FootRole::Exit)
    } else if in_ccw_arc(&ve, &wx, &we) {
        (FootRole::Exit, FootRole::Entry)
    } else {
        return false;
    };
    let Some(parent) = w.parent.and_then(|p| set.get(p)) else {
        return false;
    };
    chord_side_contains_marked(sys, arr, set, parent, from, to)
}
