//! Derivation of the depth-1 planar arrangement inside each junction.
//!
//! After one application of the thick map, each junction `J` contains the
//! image disks `F(J0)` of the junctions mapping to it and the strands of edge
//! images passing through it.  Projected to the boundary, every gate of `J`
//! carries a linear list of *items* in the gate's positive direction:
//!
//! * a *foot* for each entry and exit of a passage (an interior junction
//!   visit of an edge-image path), and
//! * an *attachment interval* for each source gate `g0` with
//!   `gate_image(g0) = g` — the footprint on `g` of the image strip emanating
//!   from the disk `F(J0)` through its cap.
//!
//! The file format pins only the nesting ranks of strands sharing a gate
//! pair; the full per-gate item order is derived here from three sources of
//! rigidity and a deterministic tiebreak:
//!
//! 1. runs crossing a strip pair the item lists of its two gates by a
//!    monotone, order-reversing bijection (the two gates of a strip are
//!    oppositely oriented by their junctions' counterclockwise boundaries);
//! 2. strands and image disks form a non-crossing arrangement in each
//!    junction disk, which forces relative orders whenever two items lead to
//!    separated destinations around the boundary;
//! 3. the declared ranks order each same-gate-pair strand family.
//!
//! Residual freedom (for example, the mutual order of two single-legged
//! image disks hanging from the same gate) does not affect any reported
//! invariant and is fixed by a canonical item-key tiebreak.  The solved
//! arrangement is validated afterwards: non-crossing, reversal and rank
//! consistency are checked, and violations are reported as errors.

use std::collections::BTreeMap;

use thiserror::Error;

use super::system::{GateIdx, JunctionIdx, StripIdx, ThickMapSystem};

/// Identity of one junction-side item on a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ItemKey {
    /// Entry (`side = 0`) or exit (`side = 1`) foot of passage `pos` of the
    /// image path of `strip`.
    Foot { strip: StripIdx, pos: usize, side: u8 },
    /// Attachment interval of the image disk of `source`'s junction, located
    /// on `gate_image(source)`.
    Att { source: GateIdx },
}

/// An interior junction visit of an edge-image path: the path of `strip`
/// enters `junction` through `entry` after step `pos` and leaves through
/// `exit` into step `pos + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Passage {
    pub strip: StripIdx,
    pub pos: usize,
    pub junction: JunctionIdx,
    pub entry: GateIdx,
    pub exit: GateIdx,
}

impl Passage {
    /// A passage whose entry and exit gates coincide: the path doubles back,
    /// and the strand closes a turn on that gate.
    pub fn is_turn(&self) -> bool {
        self.entry == self.exit
    }
}

/// Errors detected while deriving or validating the arrangement.
#[derive(Debug, Error)]
pub enum ArrangementError {
    #[error("contradictory ordering constraints on gate `{gate}`: {detail}")]
    Contradiction { gate: String, detail: String },
    #[error("crossing structures in junction `{junction}`: {detail}")]
    Crossing { junction: String, detail: String },
    #[error("strip `{strip}` item pairing is not order-reversing")]
    StripPairing { strip: String },
    #[error("declared ranks are inconsistent with the solved arrangement in junction `{junction}`")]
    RankOrder { junction: String },
}

/// The solved depth-1 arrangement.
#[derive(Debug, Clone)]
pub struct Arrangement {
    /// Ordered item list per gate (indexed by `GateIdx.0`), positive
    /// direction.
    items: Vec<Vec<ItemKey>>,
    /// All passages, in derivation order (paths by strip index, then
    /// position).
    passages: Vec<Passage>,
    /// Rank assigned to each passage within its same-gate-pair family.
    passage_rank: Vec<u32>,
}

impl Arrangement {
    pub fn items(&self, g: GateIdx) -> &[ItemKey] {
        &self.items[g.0]
    }

    /// Position of an item in its gate's ordered list.
    pub fn position(&self, g: GateIdx, key: &ItemKey) -> usize {
        self.items[g.0]
            .iter()
            .position(|k| k == key)
            .expect("item must be present on its gate")
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    pub fn passage_rank(&self, index: usize) -> u32 {
        self.passage_rank[index]
    }

    pub fn passages_at(&self, j: JunctionIdx) -> impl Iterator<Item = (usize, &Passage)> {
        self.passages
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.junction == j)
    }

    /// Gate and item position of the attachment interval for `source`.
    pub fn att_position(&self, sys: &ThickMapSystem, source: GateIdx) -> (GateIdx, usize) {
        let g = sys.gate_image(source);
        (g, self.position(g, &ItemKey::Att { source }))
    }
}

/// Nested coordinate of a boundary point on a gate.
///
/// The first step indexes the gate's solved item list; each further step
/// descends into the refinement of an attachment interval (which repeats the
/// source gate's item list, order-preserving, since the map respects the
/// surface orientation and every list is stored in its gate's positive
/// direction).  Addresses of strand feet never prefix one another — a foot
/// terminates at a crossing item while proper prefixes pass through
/// attachment items — so the derived lexicographic order is the boundary
/// order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(pub Vec<usize>);

impl Address {
    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl Arrangement {
    /// The image of a boundary point under the thick map: the point at
    /// `addr` on `gate` maps into the attachment interval of `gate` on its
    /// image gate, at the same relative coordinate one level deeper.
    pub fn push_point(
        &self,
        sys: &ThickMapSystem,
        gate: GateIdx,
        addr: &Address,
    ) -> (GateIdx, Address) {
        let (image_gate, att) = self.att_position(sys, gate);
        let mut steps = Vec::with_capacity(addr.0.len() + 1);
        steps.push(att);
        steps.extend_from_slice(&addr.0);
        (image_gate, Address(steps))
    }
}

/// Point on a junction boundary circle: gate slot, address steps, and a
/// bound tag so whole items can be treated as intervals.  Comparison is the
/// boundary order: lexicographic with the rule that a point deeper inside an
/// item lies strictly between that item's bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct CirclePoint {
    pub(crate) gate_slot: usize,
    pub(crate) steps: Vec<usize>,
    pub(crate) bound: Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Bound {
    Lo,
    Point,
    Hi,
}

impl Ord for CirclePoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap()
    }
}

impl PartialOrd for CirclePoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering;
        if self.gate_slot != other.gate_slot {
            return Some(self.gate_slot.cmp(&other.gate_slot));
        }
        let n = self.steps.len().min(other.steps.len());
        for i in 0..n {
            if self.steps[i] != other.steps[i] {
                return Some(self.steps[i].cmp(&other.steps[i]));
            }
        }
        match self.steps.len().cmp(&other.steps.len()) {
            Ordering::Equal => Some(self.bound.cmp(&other.bound)),
            // self is the containing item: its Lo precedes the deeper point,
            // its Hi follows it.
            Ordering::Less => Some(match self.bound {
                Bound::Lo => Ordering::Less,
                Bound::Hi => Ordering::Greater,
                Bound::Point => Ordering::Less,
            }),
            Ordering::Greater => Some(match other.bound {
                Bound::Lo => Ordering::Greater,
                Bound::Hi => Ordering::Less,
                Bound::Point => Ordering::Greater,
            }),
        }
    }
}

/// Location of an item: gate plus local index into the gate's canonical
/// (pre-solve) item enumeration.
type Loc = (GateIdx, usize);

struct Solver<'a> {
    sys: &'a ThickMapSystem,
    /// Canonical (sorted) item keys per gate.
    keys: Vec<Vec<ItemKey>>,
    /// `before[g][a * n + b]`: is item `a` known to precede item `b` on gate
    /// `g` (positive direction)?
    before: Vec<Vec<Option<bool>>>,
    /// Run partner of each item, across the strip its gate bounds.
    run_partner: BTreeMap<Loc, Loc>,
    /// Co-attachments of each item within its junction (the partner foot of
    /// a passage; the sibling legs of an image disk).
    co: BTreeMap<Loc, Vec<Loc>>,
    passages: Vec<Passage>,
    passage_rank: Vec<u32>,
    /// Foot locations per passage: (entry, exit).
    passage_feet: Vec<(Loc, Loc)>,
}

/// Derive the arrangement for a validated system.
pub fn solve_arrangement(sys: &ThickMapSystem) -> Result<Arrangement, ArrangementError> {
    let mut solver = Solver::new(sys);
    solver.assign_ranks()?;
    solver.propagate_to_fixpoint()?;
    solver.tiebreak()?;
    solver.finish()
}

impl<'a> Solver<'a> {
    fn new(sys: &'a ThickMapSystem) -> Self {
        let g = &sys.graph;
        let mut keys: Vec<Vec<ItemKey>> = vec![Vec::new(); g.gates.len()];
        let mut passages = Vec::new();

        // Enumerate items and passages from the image paths.
        for (e, path) in sys.edge_image.iter().enumerate() {
            let m = path.steps.len();
            for (t, &step) in path.steps.iter().enumerate() {
                let gi = g.step_initial_gate(step);
                let gt = g.step_terminal_gate(step);
                let item_i = if t == 0 {
                    ItemKey::Att {
                        source: g.strip(StripIdx(e)).ends[0],
                    }
                } else {
                    ItemKey::Foot {
                        strip: StripIdx(e),
                        pos: t - 1,
                        side: 1,
                    }
                };
                let item_t = if t == m - 1 {
                    ItemKey::Att {
                        source: g.strip(StripIdx(e)).ends[1],
                    }
                } else {
                    ItemKey::Foot {
                        strip: StripIdx(e),
                        pos: t,
                        side: 0,
                    }
                };
                keys[gi.0].push(item_i);
                keys[gt.0].push(item_t);
                if t + 1 < m {
                    passages.push(Passage {
                        strip: StripIdx(e),
                        pos: t,
                        junction: g.step_terminal_junction(step),
                        entry: gt,
                        exit: g.step_initial_gate(path.steps[t + 1]),
                    });
                }
            }
        }
        for list in &mut keys {
            list.sort();
            list.dedup();
        }
        let locate = |keys: &Vec<Vec<ItemKey>>, gate: GateIdx, key: ItemKey| -> Loc {
            (
                gate,
                keys[gate.0]
                    .iter()
                    .position(|k| *k == key)
                    .expect("item enumerated on its gate"),
            )
        };

        // Run partners: re-walk the paths now that indices are stable.
        let mut run_partner = BTreeMap::new();
        for (e, path) in sys.edge_image.iter().enumerate() {
            let m = path.steps.len();
            for (t, &step) in path.steps.iter().enumerate() {
                let gi = g.step_initial_gate(step);
                let gt = g.step_terminal_gate(step);
                let item_i = if t == 0 {
                    ItemKey::Att {
                        source: g.strip(StripIdx(e)).ends[0],
                    }
                } else {
                    ItemKey::Foot {
                        strip: StripIdx(e),
                        pos: t - 1,
                        side: 1,
                    }
                };
                let item_t = if t == m - 1 {
                    ItemKey::Att {
                        source: g.strip(StripIdx(e)).ends[1],
                    }
                } else {
                    ItemKey::Foot {
                        strip: StripIdx(e),
                        pos: t,
                        side: 0,
                    }
                };
                let a = locate(&keys, gi, item_i);
                let b = locate(&keys, gt, item_t);
                run_partner.insert(a, b);
                run_partner.insert(b, a);
            }
        }

        // Co-attachments: passage feet pair with each other; disk legs are
        // mutual siblings in source-boundary order.
        let mut co: BTreeMap<Loc, Vec<Loc>> = BTreeMap::new();
        let mut passage_feet = Vec::with_capacity(passages.len());
        for p in &passages {
            let fe = locate(
                &keys,
                p.entry,
                ItemKey::Foot {
                    strip: p.strip,
                    pos: p.pos,
                    side: 0,
                },
            );
            let fx = locate(
                &keys,
                p.exit,
                ItemKey::Foot {
                    strip: p.strip,
                    pos: p.pos,
                    side: 1,
                },
            );
            co.entry(fe).or_default().push(fx);
            co.entry(fx).or_default().push(fe);
            passage_feet.push((fe, fx));
        }
        for j0 in 0..g.junctions.len() {
            let legs: Vec<Loc> = g
                .junction(JunctionIdx(j0))
                .boundary
                .iter()
                .map(|&g0| locate(&keys, sys.gate_image(g0), ItemKey::Att { source: g0 }))
                .collect();
            for (i, &a) in legs.iter().enumerate() {
                for (k, &b) in legs.iter().enumerate() {
                    if i != k {
                        co.entry(a).or_default().push(b);
                    }
                }
            }
        }

        let before = keys
            .iter()
            .map(|list| vec![None; list.len() * list.len()])
            .collect();
        let passage_rank = vec![0; passages.len()];
        Solver {
            sys,
            keys,
            before,
            run_partner,
            co,
            passages,
            passage_rank,
            passage_feet,
        }
    }

    /// Match declared strands to derived passages family by family: the i-th
    /// declared strand of a gate pair (declaration order) corresponds to the
    /// i-th derived passage of that pair (derivation order) and donates its
    /// rank.
    fn assign_ranks(&mut self) -> Result<(), ArrangementError> {
        let g = &self.sys.graph;
        for j in 0..g.junctions.len() {
            let mut decl: BTreeMap<(GateIdx, GateIdx), Vec<u32>> = BTreeMap::new();
            for s in &self.sys.pictures[j] {
                let key = if s.exit < s.entry {
                    (s.exit, s.entry)
                } else {
                    (s.entry, s.exit)
                };
                decl.entry(key).or_default().push(s.rank);
            }
            let mut seen: BTreeMap<(GateIdx, GateIdx), usize> = BTreeMap::new();
            for (i, p) in self
                .passages
                .iter()
                .enumerate()
                .filter(|(_, p)| p.junction == JunctionIdx(j))
            {
                let key = if p.exit < p.entry {
                    (p.exit, p.entry)
                } else {
                    (p.entry, p.exit)
                };
                let n = seen.entry(key).or_insert(0);
                let ranks = decl.get(&key).filter(|r| *n < r.len()).ok_or_else(|| {
                    ArrangementError::RankOrder {
                        junction: g.junction(JunctionIdx(j)).name.clone(),
                    }
                })?;
                self.passage_rank[i] = ranks[*n];
                *n += 1;
            }
        }
        Ok(())
    }

    fn n(&self, g: usize) -> usize {
        self.keys[g].len()
    }

    fn get(&self, g: usize, a: usize, b: usize) -> Option<bool> {
        self.before[g][a * self.n(g) + b]
    }

    /// Record that item `a` precedes item `b` on gate `g`.  Returns whether
    /// new information was added.
    fn set(&mut self, g: usize, a: usize, b: usize, val: bool) -> Result<bool, ArrangementError> {
        if a == b {
            return Err(self.contradiction(g, a, b));
        }
        let n = self.n(g);
        match self.before[g][a * n + b] {
            Some(v) if v == val => Ok(false),
            Some(_) => Err(self.contradiction(g, a, b)),
            None => {
                self.before[g][a * n + b] = Some(val);
                self.before[g][b * n + a] = Some(!val);
                Ok(true)
            }
        }
    }

    fn contradiction(&self, g: usize, a: usize, b: usize) -> ArrangementError {
        ArrangementError::Contradiction {
            gate: self.sys.graph.gates[g].name.clone(),
            detail: format!("items {:?} and {:?}", self.keys[g][a], self.keys[g][b]),
        }
    }

    fn propagate_to_fixpoint(&mut self) -> Result<(), ArrangementError> {
        loop {
            let mut changed = false;
            changed |= self.rule_destination_separation()?;
            changed |= self.rule_ranks()?;
            changed |= self.rule_strip_reversal()?;
            changed |= self.rule_chord_reversal()?;
            changed |= self.rule_turn_protection()?;
            changed |= self.rule_turn_nesting()?;
            changed |= self.rule_disk_fan()?;
            changed |= self.rule_transitivity()?;
            if !changed {
                return Ok(());
            }
        }
    }

    /// Counterclockwise gate distances of an item's co-attachments, measured
    /// from its own gate around the junction boundary.  `None` when a
    /// co-attachment sits on the item's own gate (turns, recurrent disk
    /// legs), which disables the separation rule for that item.
    fn ext_dists(&self, loc: Loc) -> Option<Vec<usize>> {
        let g = &self.sys.graph;
        let co = self.co.get(&loc)?;
        let mut out = Vec::new();
        for &(cg, _) in co {
            let d = g.ccw_distance(loc.0, cg);
            if d == 0 {
                return None;
            }
            out.push(d);
        }
        if out.is_empty() {
            None
        } else {
            Some(out)
        }
    }

    /// Rule: two items on one gate whose destination gate ranges are
    /// separated (going counterclockwise from the shared gate) are ordered
    /// with the later-destined item first.
    fn rule_destination_separation(&mut self) -> Result<bool, ArrangementError> {
        let mut changed = false;
        for g in 0..self.keys.len() {
            let n = self.n(g);
            for a in 0..n {
                for b in (a + 1)..n {
                    if self.get(g, a, b).is_some() {
                        continue;
                    }
                    let (Some(da), Some(db)) =
                        (self.ext_dists((GateIdx(g), a)), self.ext_dists((GateIdx(g), b)))
                    else {
                        continue;
                    };
                    let (amin, amax) = (
                        *da.iter().min().unwrap(),
                        *da.iter().max().unwrap(),
                    );
                    let (bmin, bmax) = (
                        *db.iter().min().unwrap(),
                        *db.iter().max().unwrap(),
                    );
                    if amax < bmin {
                        // b is destined strictly later: b comes first.
                        changed |= self.set(g, b, a, true)?;
                    } else if bmax < amin {
                        changed |= self.set(g, a, b, true)?;
                    }
                }
            }
        }
        Ok(changed)
    }

    /// Rule: declared ranks order each strand family.  For a passing family
    /// on gates `a < b`, the feet on `a` follow rank order in the positive
    /// direction (and on `b` the reverse, by non-crossing).  Turn families
    /// are handled by `rule_turn_nesting`.
    fn rule_ranks(&mut self) -> Result<bool, ArrangementError> {
        let mut changed = false;
        let mut families: BTreeMap<(JunctionIdx, GateIdx, GateIdx), Vec<usize>> = BTreeMap::new();
        for (i, p) in self.passages.iter().enumerate() {
            if p.is_turn() {
                continue;
            }
            let key = if p.exit < p.entry {
                (p.junction, p.exit, p.entry)
            } else {
                (p.junction, p.entry, p.exit)
            };
            families.entry(key).or_default().push(i);
        }
        for ((_, low_gate, _), mut members) in families {
            if members.len() < 2 {
                continue;
            }
            members.sort_by_key(|&i| self.passage_rank[i]);
            // Foot of each member on the low gate, and on the high gate.
            let feet: Vec<(Loc, Loc)> = members
                .iter()
                .map(|&i| {
                    let (fe, fx) = self.passage_feet[i];
                    if fe.0 == low_gate {
                        (fe, fx)
                    } else {
                        (fx, fe)
                    }
                })
                .collect();
            for w in 0..feet.len() - 1 {
                let (lo0, hi0) = feet[w];
                let (lo1, hi1) = feet[w + 1];
                changed |= self.set(lo0.0 .0, lo0.1, lo1.1, true)?;
                changed |= self.set(hi0.0 .0, hi1.1, hi0.1, true)?;
            }
        }
        Ok(changed)
    }

    /// Rule: the run pairing across each strip is order-reversing between
    /// the two gate lists.
    fn rule_strip_reversal(&mut self) -> Result<bool, ArrangementError> {
        let mut changed = false;
        for g in 0..self.keys.len() {
            let n = self.n(g);
            for a in 0..n {
                for b in (a + 1)..n {
                    let Some(v) = self.get(g, a, b) else { continue };
                    let pa = self.run_partner[&(GateIdx(g), a)];
                    let pb = self.run_partner[&(GateIdx(g), b)];
                    if pa.0 == pb.0 {
                        changed |= self.set(pa.0 .0, pb.1, pa.1, v)?;
                    }
                }
            }
        }
        Ok(changed)
    }

    /// Rule: two non-crossing chords joining the same pair of gates have
    /// oppositely ordered feet on the two gates.  Applies to any two items
    /// with unique co-attachments on one common far gate.
    fn rule_chord_reversal(&mut self) -> Result<bool, ArrangementError> {
        let mut changed = false;
        for g in 0..self.keys.len() {
            let n = self.n(g);
            for a in 0..n {
                for b in (a + 1)..n {
                    let Some(v) = self.get(g, a, b) else { continue };
                    let (Some(ca), Some(cb)) = (
                        self.co.get(&(GateIdx(g), a)),
                        self.co.get(&(GateIdx(g), b)),
                    ) else {
                        continue;
                    };
                    if ca.len() != 1 || cb.len() != 1 {
                        continue;
                    }
                    let (pa, pb) = (ca[0], cb[0]);
                    if pa.0 == pb.0 && pa.0 != GateIdx(g) {
                        changed |= self.set(pa.0 .0, pb.1, pa.1, v)?;
                    }
                }
            }
        }
        Ok(changed)
    }

    /// Rule: no item with a co-attachment on another gate may sit between
    /// the two feet of a turn (the hairpin touches the boundary only inside
    /// its own gate).
    fn rule_turn_protection(&mut self) -> Result<bool, ArrangementError> {
        let mut changed = false;
        for i in 0..self.passages.len() {
            if !self.passages[i].is_turn() {
                continue;
            }
            let (fe, fx) = self.passage_feet[i];
            let g = fe.0 .0;
            let n = self.n(g);
            for w in 0..n {
                if w == fe.1 || w == fx.1 {
                    continue;
                }
                let external = self
                    .ext_dists((GateIdx(g), w))
                    .map(|d| !d.is_empty())
                    .unwrap_or(false);
                if !external {
                    continue;
                }
                // w relates to both feet the same way.
                if let Some(v) = self.get(g, w, fe.1) {
                    changed |= self.set(g, w, fx.1, v)?;
                }
                if let Some(v) = self.get(g, w, fx.1) {
                    changed |= self.set(g, w, fe.1, v)?;
                }
            }
        }
        Ok(changed)
    }

    /// Rule: turns of one family nest by rank (rank 0 innermost): the feet
    /// of the outer turn straddle both feet of the inner.
    fn rule_turn_nesting(&mut self) -> Result<bool, ArrangementError> {
        let mut changed = false;
        let mut families: BTreeMap<(JunctionIdx, GateIdx), Vec<usize>> = BTreeMap::new();
        for (i, p) in self.passages.iter().enumerate() {
            if p.is_turn() {
                families.entry((p.junction, p.entry)).or_default().push(i);
            }
        }
        for (_, members) in families {
            for &i in &members {
                for &j in &members {
                    if self.passage_rank[i] >= self.passage_rank[j] {
                        continue;
                    }
                    // i is inner, j is outer.
                    let (ip, iq) = self.passage_feet[i];
                    let (jp, jq) = self.passage_feet[j];
                    let g = ip.0 .0;
                    let inner = [ip.1, iq.1];
                    let outer = [jp.1, jq.1];
                    for &o in &outer {
                        // If o precedes either inner foot, it precedes both
                        // and the other outer foot follows both; if o
                        // follows either inner foot, the mirror image holds.
                        let other = if o == outer[0] { outer[1] } else { outer[0] };
                        for &f in &inner {
                            if self.get(g, o, f) == Some(true) {
                                for &f2 in &inner {
                                    changed |= self.set(g, o, f2, true)?;
                                    changed |= self.set(g, f2, other, true)?;
                                }
                            } else if self.get(g, f, o) == Some(true) {
                                for &f2 in &inner {
                                    changed |= self.set(g, f2, o, true)?;
                                    changed |= self.set(g, other, f2, true)?;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(changed)
    }

    /// Rule: the legs of one image disk fan out without crossing, so legs on
    /// a shared gate are ordered by the source junction's boundary cycle.
    fn rule_disk_fan(&mut self) -> Result<bool, ArrangementError> {
        let g = &self.sys.graph;
        let mut changed = false;
        for j0 in 0..g.junctions.len() {
            let boundary = &g.junction(JunctionIdx(j0)).boundary;
            if boundary.len() < 2 {
                continue;
            }
            let legs: Vec<(GateIdx, Loc)> = boundary
                .iter()
                .map(|&g0| {
                    let gate = self.sys.gate_image(g0);
                    let idx = self.keys[gate.0]
                        .iter()
                        .position(|k| *k == ItemKey::Att { source: g0 })
                        .expect("attachment interval enumerated");
                    (gate, (gate, idx))
                })
                .collect();
            let m = legs.len();
            for a in 0..m {
                for b in 0..m {
                    if a == b || legs[a].0 != legs[b].0 {
                        continue;
                    }
                    // A leg on a different gate inside the source arc from a
                    // to b forces b to precede a on the shared gate (the fan
                    // wraps past the junction start before returning).  A
                    // different-gate leg only in the opposite arc forces a
                    // to precede b.  Same-gate legs in the arcs don't pin
                    // this pair.
                    let other_gate_in_arc = |from: usize, to: usize| {
                        let mut k = (from + 1) % m;
                        while k != to {
                            if legs[k].0 != legs[from].0 {
                                return true;
                            }
                            k = (k + 1) % m;
                        }
                        false
                    };
                    let (la, lb) = (legs[a].1, legs[b].1);
                    if other_gate_in_arc(a, b) {
                        changed |= self.set(la.0 .0, lb.1, la.1, true)?;
                    } else if other_gate_in_arc(b, a) {
                        changed |= self.set(la.0 .0, la.1, lb.1, true)?;
                    }
                }
            }
        }
        Ok(changed)
    }

    fn rule_transitivity(&mut self) -> Result<bool, ArrangementError> {
        let mut changed = false;
        for g in 0..self.keys.len() {
            let n = self.n(g);
            loop {
                let mut local = false;
                for a in 0..n {
                    for b in 0..n {
                        if self.get(g, a, b) != Some(true) {
                            continue;
                        }
                        for c in 0..n {
                            if self.get(g, b, c) == Some(true)
                                && self.get(g, a, c) != Some(true)
                            {
                                self.set(g, a, c, true)?;
                                local = true;
                            }
                        }
                    }
                }
                changed |= local;
                if !local {
                    break;
                }
            }
        }
        Ok(changed)
    }

    /// Fix residual freedom deterministically: repeatedly order the first
    /// undetermined pair (gate index, then canonical item keys) by key order
    /// and re-propagate.
    fn tiebreak(&mut self) -> Result<(), ArrangementError> {
        loop {
            let mut pick = None;
            'outer: for g in 0..self.keys.len() {
                let n = self.n(g);
                for a in 0..n {
                    for b in (a + 1)..n {
                        if self.get(g, a, b).is_none() {
                            pick = Some((g, a, b));
                            break 'outer;
                        }
                    }
                }
            }
            let Some((g, a, b)) = pick else {
                return Ok(());
            };
            // Canonical keys are pre-sorted per gate, so a < b by key.
            self.set(g, a, b, true)?;
            self.propagate_to_fixpoint()?;
        }
    }

    fn finish(self) -> Result<Arrangement, ArrangementError> {
        let g = &self.sys.graph;
        // Extract total orders.
        let mut items: Vec<Vec<ItemKey>> = Vec::with_capacity(self.keys.len());
        for gi in 0..self.keys.len() {
            let n = self.n(gi);
            let mut order: Vec<usize> = (0..n).collect();
            // Position = number of predecessors; verify it is a permutation.
            let count_before = |x: usize| {
                (0..n)
                    .filter(|&y| self.get(gi, y, x) == Some(true))
                    .count()
            };
            order.sort_by_key(|&x| count_before(x));
            let positions: Vec<usize> = order.iter().map(|&x| count_before(x)).collect();
            for (rank, &p) in positions.iter().enumerate() {
                if p != rank {
                    return Err(ArrangementError::Contradiction {
                        gate: g.gates[gi].name.clone(),
                        detail: "relation closure is not a total order".into(),
                    });
                }
            }
            items.push(order.into_iter().map(|x| self.keys[gi][x]).collect());
        }
        let arrangement = Arrangement {
            items,
            passages: self.passages,
            passage_rank: self.passage_rank,
        };
        validate_arrangement(self.sys, &arrangement)?;
        Ok(arrangement)
    }
}

/// Post-solve validation: strip pairings reverse, junction structures are
/// non-crossing, and solved positions respect the declared ranks.
fn validate_arrangement(
    sys: &ThickMapSystem,
    arr: &Arrangement,
) -> Result<(), ArrangementError> {
    let g = &sys.graph;

    // Strip pairing must reverse.
    let partner = run_partner_map(sys);
    for s in 0..g.strips.len() {
        let [q0, q1] = g.strip(StripIdx(s)).ends;
        let items0 = arr.items(q0);
        let items1 = arr.items(q1);
        if items0.len() != items1.len() {
            return Err(ArrangementError::StripPairing {
                strip: g.strip(StripIdx(s)).name.clone(),
            });
        }
        // Partner of the item at position p on q0 must be at position
        // len-1-p on q1.
        for (p, key) in items0.iter().enumerate() {
            let (pg, pkey) = partner[&(q0, *key)];
            if pg != q1 || arr.position(q1, &pkey) != items1.len() - 1 - p {
                return Err(ArrangementError::StripPairing {
                    strip: g.strip(StripIdx(s)).name.clone(),
                });
            }
        }
    }

    // Non-crossing structures per junction.
    for j in 0..g.junctions.len() {
        let structures = junction_structures(sys, arr, JunctionIdx(j));
        for a in 0..structures.len() {
            for b in (a + 1)..structures.len() {
                if interleaved(&structures[a].1, &structures[b].1) {
                    return Err(ArrangementError::Crossing {
                        junction: g.junction(JunctionIdx(j)).name.clone(),
                        detail: format!("{} crosses {}", structures[a].0, structures[b].0),
                    });
                }
            }
        }
    }

    // Each image disk's legs, read in source boundary order, must land in
    // cyclic order around the target boundary (a non-crossing fan has at
    // most one wrap).
    for j0 in 0..g.junctions.len() {
        let positions: Vec<(usize, usize)> = g
            .junction(JunctionIdx(j0))
            .boundary
            .iter()
            .map(|&g0| {
                let (gate, pos) = arr.att_position(sys, g0);
                (g.gate(gate).boundary_pos, pos)
            })
            .collect();
        let m = positions.len();
        if m >= 3 {
            let descents = (0..m)
                .filter(|&i| positions[i] > positions[(i + 1) % m])
                .count();
            if descents > 1 {
                return Err(ArrangementError::Crossing {
                    junction: g
                        .junction(sys.junction_image[j0])
                        .name
                        .clone(),
                    detail: format!(
                        "legs of image disk of `{}` are not in cyclic order",
                        g.junction(JunctionIdx(j0)).name
                    ),
                });
            }
        }
    }

    // Ranks: passing families ordered by rank on the low gate; turn families
    // nested by rank.
    for j in 0..g.junctions.len() {
        let mut passing: BTreeMap<(GateIdx, GateIdx), Vec<(u32, usize)>> = BTreeMap::new();
        let mut turns: BTreeMap<GateIdx, Vec<(u32, usize)>> = BTreeMap::new();
        for (i, p) in arr.passages_at(JunctionIdx(j)) {
            if p.is_turn() {
                turns.entry(p.entry).or_default().push((arr.passage_rank(i), i));
            } else {
                let key = if p.exit < p.entry {
                    (p.exit, p.entry)
                } else {
                    (p.entry, p.exit)
                };
                passing.entry(key).or_default().push((arr.passage_rank(i), i));
            }
        }
        for ((low, _), mut fam) in passing {
            fam.sort();
            let mut last = None;
            for (_, i) in fam {
                let p = &arr.passages()[i];
                let foot_low = if p.entry == low {
                    arr.position(low, &ItemKey::Foot { strip: p.strip, pos: p.pos, side: 0 })
                } else {
                    arr.position(low, &ItemKey::Foot { strip: p.strip, pos: p.pos, side: 1 })
                };
                if let Some(prev) = last {
                    if foot_low <= prev {
                        return Err(ArrangementError::RankOrder {
                            junction: g.junction(JunctionIdx(j)).name.clone(),
                        });
                    }
                }
                last = Some(foot_low);
            }
        }
        for (gate, mut fam) in turns {
            fam.sort();
            let spans: Vec<(usize, usize)> = fam
                .iter()
                .map(|&(_, i)| {
                    let p = &arr.passages()[i];
                    let a = arr.position(gate, &ItemKey::Foot { strip: p.strip, pos: p.pos, side: 0 });
                    let b = arr.position(gate, &ItemKey::Foot { strip: p.strip, pos: p.pos, side: 1 });
                    (a.min(b), a.max(b))
                })
                .collect();
            for w in 0..spans.len().saturating_sub(1) {
                let (inner, outer) = (spans[w], spans[w + 1]);
                if !(outer.0 < inner.0 && inner.1 < outer.1) {
                    return Err(ArrangementError::RankOrder {
                        junction: g.junction(JunctionIdx(j)).name.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

fn run_partner_map(
    sys: &ThickMapSystem,
) -> BTreeMap<(GateIdx, ItemKey), (GateIdx, ItemKey)> {
    let g = &sys.graph;
    let mut partner = BTreeMap::new();
    for (e, path) in sys.edge_image.iter().enumerate() {
        let m = path.steps.len();
        for (t, &step) in path.steps.iter().enumerate() {
            let gi = g.step_initial_gate(step);
            let gt = g.step_terminal_gate(step);
            let item_i = if t == 0 {
                ItemKey::Att {
                    source: g.strip(StripIdx(e)).ends[0],
                }
            } else {
                ItemKey::Foot {
                    strip: StripIdx(e),
                    pos: t - 1,
                    side: 1,
                }
            };
            let item_t = if t == m - 1 {
                ItemKey::Att {
                    source: g.strip(StripIdx(e)).ends[1],
                }
            } else {
                ItemKey::Foot {
                    strip: StripIdx(e),
                    pos: t,
                    side: 0,
                }
            };
            partner.insert((gi, item_i), (gt, item_t));
            partner.insert((gt, item_t), (gi, item_i));
        }
    }
    partner
}

/// Connected structures in a junction, each with its boundary positions
/// (gate boundary position, item position) and a display name.
fn junction_structures(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    j: JunctionIdx,
) -> Vec<(String, Vec<(usize, usize)>)> {
    let g = &sys.graph;
    let mut out = Vec::new();
    for (i, p) in arr.passages_at(j) {
        let a = (
            g.gate(p.entry).boundary_pos,
            arr.position(p.entry, &ItemKey::Foot { strip: p.strip, pos: p.pos, side: 0 }),
        );
        let b = (
            g.gate(p.exit).boundary_pos,
            arr.position(p.exit, &ItemKey::Foot { strip: p.strip, pos: p.pos, side: 1 }),
        );
        out.push((
            format!("strand {} of `{}`", i, g.strip(p.strip).name),
            vec![a, b],
        ));
    }
    for j0 in 0..g.junctions.len() {
        if sys.junction_image[j0] != j {
            continue;
        }
        let positions: Vec<(usize, usize)> = g
            .junction(JunctionIdx(j0))
            .boundary
            .iter()
            .map(|&g0| {
                let (gate, pos) = arr.att_position(sys, g0);
                (g.gate(gate).boundary_pos, pos)
            })
            .collect();
        out.push((
            format!("image disk of `{}`", g.junction(JunctionIdx(j0)).name),
            positions,
        ));
    }
    out
}

/// Do two position sets interleave around the junction boundary circle?
/// (Positions compare lexicographically: gate boundary slot, then item slot.)
fn interleaved(a: &[(usize, usize)], b: &[(usize, usize)]) -> bool {
    let mut marks: Vec<((usize, usize), u8)> = a
        .iter()
        .map(|&p| (p, 0u8))
        .chain(b.iter().map(|&p| (p, 1u8)))
        .collect();
    marks.sort();
    // Non-interleaving means all marks of one set are cyclically contiguous.
    let total_b = b.len();
    if total_b == 0 || a.is_empty() {
        return false;
    }
    // Count circular blocks of b-marks.
    let m = marks.len();
    let mut blocks = 0;
    for i in 0..m {
        let prev = (i + m - 1) % m;
        if marks[i].1 == 1 && marks[prev].1 == 0 {
            blocks += 1;
        }
    }
    blocks > 1
}
