//! Turns of iterated edge images and their nesting order.
//!
//! A *turn* is a strand of some iterated edge image crossing a junction: it
//! enters through one gate and leaves through another (or the same, closing
//! a hairpin over part of that gate).  Depth-1 turns are the passages of the
//! edge-image paths, located by the solved arrangement; each deeper
//! generation is the image of the previous one, carried into the attachment
//! intervals of the junction disks.  A turn's feet are recorded as boundary
//! [`Address`]es, so two turns with the same gate pair always compare: the
//! comparison walks the shared address prefix and is decided the first time
//! the ancestors separate — exactly the inductive pullback of the depth-1
//! picture order.
//!
//! Whether a turn wraps the marked point of its junction is decided
//! recursively: the marked point sits inside the image disk of its unique
//! marked predecessor junction, so a turn encloses it exactly when that
//! disk's attachment legs all fall in the boundary interval the turn closes
//! over, with ties at the interval ends resolved one level up the parent
//! chain.

use std::cmp::Ordering;

use thiserror::Error;

use super::arrange::{
    solve_arrangement, Address, Arrangement, ArrangementError, Bound, CirclePoint, ItemKey,
};
use super::system::{GateIdx, JunctionIdx, StripIdx, ThickMapSystem};

/// Identifier of a turn inside a [`TurnNesting`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TurnId(pub usize);

/// One strand of an iterated edge image crossing a junction.
#[derive(Debug, Clone)]
pub struct Turn {
    pub junction: JunctionIdx,
    pub entry: GateIdx,
    pub exit: GateIdx,
    /// Boundary addresses of the entry and exit feet on their gates.
    pub entry_foot: Address,
    pub exit_foot: Address,
    /// Iterate in which the turn first appears (1 = edge-image passage).
    pub depth: usize,
    /// Edge whose iterated image the turn belongs to.
    pub source: StripIdx,
    /// Turn of the previous depth this one is the image of.
    pub parent: Option<TurnId>,
    /// Does the closed-over boundary interval wrap the junction's marked
    /// point?
    pub encloses_marked: bool,
}

impl Turn {
    /// Both feet on one gate: the strand doubles back.
    pub fn is_hairpin(&self) -> bool {
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
}

#[derive(Debug, Error)]
pub enum NestingError {
    #[error("cannot order the depth-1 picture: {0}")]
    Arrangement(#[from] ArrangementError),
}

/// All turns up to a given depth, with the solved depth-1 arrangement they
/// are anchored in.
#[derive(Debug, Clone)]
pub struct TurnNesting {
    turns: Vec<Turn>,
    arrangement: Arrangement,
    depth: usize,
}

impl TurnNesting {
    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn turn(&self, id: TurnId) -> &Turn {
        &self.turns[id.0]
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    /// Compare two turns with the same junction and gate pair; `None` for
    /// turns that do not share them.  For hairpins, `Less` means nested
    /// strictly inside (or entirely earlier along the gate when the spans
    /// are disjoint); for passing strands, turns are ordered by their foot
    /// on the smaller gate.  Restricted to one gate pair this is a strict
    /// total order refining the depth-1 nesting ranks.
    pub fn compare(&self, a: TurnId, b: TurnId) -> Option<Ordering> {
        let (ta, tb) = (self.turn(a), self.turn(b));
        if ta.junction != tb.junction || ta.gate_pair() != tb.gate_pair() {
            return None;
        }
        if a == b {
            return Some(Ordering::Equal);
        }
        if ta.is_hairpin() {
            let (alo, ahi) = span(ta);
            let (blo, bhi) = span(tb);
            if blo < alo && ahi < bhi {
                Some(Ordering::Less)
            } else if alo < blo && bhi < ahi {
                Some(Ordering::Greater)
            } else if ahi < blo {
                Some(Ordering::Less)
            } else if bhi < alo {
                Some(Ordering::Greater)
            } else {
                None
            }
        } else {
            let low = ta.gate_pair().0;
            let fa = foot_on(ta, low);
            let fb = foot_on(tb, low);
            Some(fa.cmp(fb))
        }
    }
}

fn span(t: &Turn) -> (&Address, &Address) {
    if t.entry_foot <= t.exit_foot {
        (&t.entry_foot, &t.exit_foot)
    } else {
        (&t.exit_foot, &t.entry_foot)
    }
}

fn foot_on(t: &Turn, gate: GateIdx) -> &Address {
    if t.entry == gate {
        &t.entry_foot
    } else {
        &t.exit_foot
    }
}

/// Materialize all turns of iterated edge images up to `depth`.
pub fn derive_nesting(sys: &ThickMapSystem, depth: usize) -> Result<TurnNesting, NestingError> {
    let arrangement = solve_arrangement(sys)?;
    let mut turns: Vec<Turn> = Vec::new();

    // Depth 1: passages of the edge-image paths.
    for p in arrangement.passages() {
        let entry_foot = Address(vec![arrangement.position(
            p.entry,
            &ItemKey::Foot {
                strip: p.strip,
                pos: p.pos,
                side: 0,
            },
        )]);
        let exit_foot = Address(vec![arrangement.position(
            p.exit,
            &ItemKey::Foot {
                strip: p.strip,
                pos: p.pos,
                side: 1,
            },
        )]);
        turns.push(Turn {
            junction: p.junction,
            entry: p.entry,
            exit: p.exit,
            entry_foot,
            exit_foot,
            depth: 1,
            source: p.strip,
            parent: None,
            encloses_marked: false,
        });
    }

    // Deeper generations: push each previous generation forward once.
    let mut generation: Vec<usize> = (0..turns.len()).collect();
    for d in 2..=depth {
        let mut next = Vec::new();
        for &i in &generation {
            let t = &turns[i];
            let (entry, entry_foot) = arrangement.push_point(sys, t.entry, &t.entry_foot);
            let (exit, exit_foot) = arrangement.push_point(sys, t.exit, &t.exit_foot);
            let child = Turn {
                junction: sys.junction_image[t.junction.0],
                entry,
                exit,
                entry_foot,
                exit_foot,
                depth: d,
                source: t.source,
                parent: Some(TurnId(i)),
                encloses_marked: false,
            };
            next.push(turns.len());
            turns.push(child);
        }
        generation = next;
    }
    if depth == 0 {
        turns.clear();
    }

    // Enclosure flags, computed with the full parent chain available.
    for i in 0..turns.len() {
        let t = &turns[i];
        let (from, to) = if t.is_hairpin() {
            // Interval between the feet along the shared gate.
            if t.entry_foot <= t.exit_foot {
                (Role::Entry, Role::Exit)
            } else {
                (Role::Exit, Role::Entry)
            }
        } else {
            (Role::Entry, Role::Exit)
        };
        let flag = arc_contains_marked(sys, &arrangement, &turns, i, from, to);
        turns[i].encloses_marked = flag;
    }

    Ok(TurnNesting {
        turns,
        arrangement,
        depth,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Entry,
    Exit,
}

fn foot_of(t: &Turn, r: Role) -> (GateIdx, &Address) {
    match r {
        Role::Entry => (t.entry, &t.entry_foot),
        Role::Exit => (t.exit, &t.exit_foot),
    }
}

/// Does the region bounded by turn `i`'s strand and the counterclockwise
/// boundary arc from its `from` foot to its `to` foot contain the junction's
/// marked point?
///
/// The marked point lies inside the image disk of the junction's marked
/// predecessor, so the region contains it exactly when every attachment leg
/// of that disk lies inside the arc.  A leg that contains one of the feet is
/// the cap the strand itself passes through; the question then descends to
/// the parent strand in the source junction, whose boundary arc (same foot
/// roles, orientation preserved) cuts the disk the same way.
fn arc_contains_marked(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    turns: &[Turn],
    i: usize,
    from: Role,
    to: Role,
) -> bool {
    let t = &turns[i];
    let Some(pred) = sys.marked_predecessor(t.junction) else {
        return false;
    };
    let g = &sys.graph;
    let legs: Vec<(GateIdx, usize)> = g
        .junction(pred)
        .boundary
        .iter()
        .map(|&g0| arr.att_position(sys, g0))
        .collect();

    let (fg, fa) = foot_of(t, from);
    let (tg, ta) = foot_of(t, to);
    // A foot sitting inside a leg's attachment interval means the strand
    // passes through that cap: recurse into the parent.
    let foot_in_leg = |gate: GateIdx, addr: &Address| {
        legs.iter()
            .any(|&(lg, li)| lg == gate && addr.0.first() == Some(&li))
    };
    if foot_in_leg(fg, fa) || foot_in_leg(tg, ta) {
        let Some(parent) = t.parent else {
            return false;
        };
        return arc_contains_marked(sys, arr, turns, parent.0, from, to);
    }

    let point = |gate: GateIdx, steps: Vec<usize>, bound: Bound| CirclePoint {
        gate_slot: g.gate(gate).boundary_pos,
        steps,
        bound,
    };
    let start = point(fg, fa.0.clone(), Bound::Point);
    let end = point(tg, ta.0.clone(), Bound::Point);
    let inside = |p: &CirclePoint| {
        if start < end {
            *p > start && *p < end
        } else {
            *p > start || *p < end
        }
    };
    let mut any_in = false;
    let mut all_in = true;
    for &(lg, li) in &legs {
        let lo = point(lg, vec![li], Bound::Lo);
        let hi = point(lg, vec![li], Bound::Hi);
        if inside(&lo) && inside(&hi) {
            any_in = true;
        } else {
            all_in = false;
        }
    }
    any_in && all_in
}
