//! Chart assembly: one rectangle per strip, glued along chord intervals.
//!
//! The chart realizes the measured foliation carried by an invariant track.
//! Each strip becomes a `width × height` rectangle (left and right Perron
//! vector entries), each chord glues an interval on one vertical side to an
//! interval on another, and everything a junction carries besides chords —
//! free gaps, marked-point rays, complementary faces — collapses to points.
//!
//! Collapsed points are tracked explicitly as *point classes*: equivalence
//! classes of stacked-interval endpoints under the gluing.  Every class knows
//! how many quadrant corners and half-disk side points meet there, which
//! yields its sector count `k = corners/2 + interior`.  Classes made of side
//! interior points alone are genuine surface points — a regular point has two
//! half-disks (`k = 2`), an `n`-gon face of the chord system collapses to an
//! `n`-pronged singularity.  Classes that touch a horizontal rectangle edge
//! sit on the rim of a complementary region instead.  That region carries no
//! transverse measure, so it collapses too: a rim class of angle `π` becomes
//! a regular fold tip, wider rim classes feed their excess into one point at
//! infinity per boundary circuit, with `k_∞ = Σ (k_rim − 1)`.  Summing
//! `2 − k` over interior classes and circuit points of a finite chart
//! recovers the Euler count `4 − 4g`, which [`singularity_check`] verifies.
//!
//! Truncated (infinite) tracks leave an unidentified *residual* at the top of
//! some stacks, no larger than the geometric tail of the weight series; those
//! segments form the boundary polygon, and the interval ladders climbing
//! toward them feed the annulus constructions in the modulus module.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::graph::{GateIdx, JunctionIdx, StripIdx, ThickMapSystem};
use crate::measure::{check_switch_conditions, WeightAssignment};
use crate::spectral::PerronData;
use crate::track::{ngon_census, ChordId, GonKind, InvariantTrack, LimitKind};

use super::ChartError;

/// Residuals at most this size count as exact full coverage of a side.
pub(super) const FULL_COVER_EPS: f64 = 1e-9;

/// Switch-condition tolerance (beyond the tail allowance) required before any
/// geometry is assembled.
const SWITCH_TOL: f64 = 1e-9;

/// One rectangle of the chart: the flat picture of a strip.
#[derive(Debug, Clone)]
pub struct Rectangle {
    pub strip: StripIdx,
    /// Strip name, used as the rectangle id.
    pub name: String,
    /// Horizontal side length: left Perron vector entry.
    pub width: f64,
    /// Vertical side length: right Perron vector entry.
    pub height: f64,
}

/// A vertical rectangle side: `end` 0 is drawn on the left, 1 on the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideRef {
    pub strip: StripIdx,
    pub end: u8,
}

/// An identified pair of vertical-side intervals, one per chord.
///
/// Coordinates are rectangle coordinates measured upward from the bottom
/// horizontal side, with `from < to`.  `reversed` records whether the gluing
/// map sends `from` to `partner_to` (rather than `partner_from`).
#[derive(Debug, Clone)]
pub struct Identification {
    pub chord: ChordId,
    pub side: SideRef,
    pub from: f64,
    pub to: f64,
    pub partner_side: SideRef,
    pub partner_from: f64,
    pub partner_to: f64,
    pub reversed: bool,
}

/// What kind of structure a singularity report row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityKind {
    /// A complementary `n`-gon orbit of the chord system.
    Gon,
    /// Point classes anchored to a marked periodic orbit.
    Marked,
    /// The point completing a boundary circuit of a finite chart.
    Infinity,
}

impl SingularityKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SingularityKind::Gon => "gon",
            SingularityKind::Marked => "marked",
            SingularityKind::Infinity => "infinity",
        }
    }
}

/// One row of the chart's singularity table.
#[derive(Debug, Clone)]
pub struct Singularity {
    /// Prong count.
    pub k: usize,
    /// Orbit label: gon orbit id, marked orbit label, or point-class label.
    pub orbit: String,
    pub kind: SingularityKind,
    /// Population: gons in a periodic orbit, classes in a marked orbit, or 1.
    /// Semi-infinite gon orbits report 0.
    pub count: usize,
    /// True when the structure touches the unidentified boundary (or, for a
    /// gon orbit, when the orbit is semi-infinite).
    pub open: bool,
}

/// An unidentified vertical-side segment left by truncation.
#[derive(Debug, Clone)]
pub struct BoundarySegment {
    pub side: SideRef,
    pub from: f64,
    pub to: f64,
    /// Label of the point class at the covered end of the segment.
    pub label: String,
}

/// What an accumulation point of the chart is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccumulationKind {
    /// Limit of gons descending into a marked periodic orbit.
    MarkedOrbit,
    /// The puncture at infinity.
    Infinity,
}

impl AccumulationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AccumulationKind::MarkedOrbit => "marked-orbit",
            AccumulationKind::Infinity => "infinity",
        }
    }
}

/// A point of the completed surface that the finite chart only approaches.
#[derive(Debug, Clone)]
pub struct AccumulationPoint {
    /// Marked orbit label, or `"infinity"`.
    pub label: String,
    pub kind: AccumulationKind,
}

/// An equivalence class of stacked-interval endpoints under the gluing.
#[derive(Debug, Clone)]
pub struct PointClass {
    pub label: String,
    /// Members contributing one quadrant: rectangle corners.
    pub corners: usize,
    /// Members contributing two quadrants: points inside a vertical side.
    pub interior: usize,
    /// Sector count `(corners + 2·quadrant pairs) / 2`: the prong count for an
    /// interior class, the rim angle in half-turns for a boundary class.
    pub prongs: usize,
    /// Set when the class absorbs a marked-point ray attachment.
    pub marked_orbit: Option<String>,
    /// True when some member touches an unidentified boundary segment.
    pub open: bool,
    /// True when the class sits on the rim of a complementary region: it
    /// contains a rectangle corner or a truncation-edge point.  Rim classes
    /// complete to regular points (or feed the point at infinity) when the
    /// region collapses, so they are not singularities of their own.
    pub boundary: bool,
    /// Representative location `(strip, end, height)` in rectangle
    /// coordinates, for rendering.
    pub anchor: (StripIdx, u8, f64),
}

/// A flat chart of the invariant foliation.
///
/// `rectangles[i]` is the picture of strip `i`, so strip indices double as
/// rectangle indices.  For truncated tracks the identifications cover each
/// vertical side only up to a residual bounded by the weight tail, and the
/// leftover segments form `boundary_polygon`.
#[derive(Debug, Clone)]
pub struct Chart {
    pub rectangles: Vec<Rectangle>,
    pub identifications: Vec<Identification>,
    pub singularities: Vec<Singularity>,
    pub boundary_polygon: Vec<BoundarySegment>,
    pub accumulation_points: Vec<AccumulationPoint>,
    pub classes: Vec<PointClass>,
    /// Truncation tail carried over from the weights.
    pub tail_bound: f64,
    /// Genus of the ambient closed surface.
    pub genus: u32,
    /// True when the underlying track is finite (nothing truncated).
    pub finite: bool,
    /// Prong count of the point at infinity closing each boundary circuit of
    /// a finite chart, one entry per circuit.  Empty for truncated charts,
    /// whose boundary never closes up.
    pub infinity_prongs: Vec<usize>,
    /// Interval lengths climbing toward the widest residual, outermost first.
    pub infinity_ladder: Vec<f64>,
    /// Residual left above that ladder.
    pub infinity_residual: f64,
    /// Per marked orbit: widths of the nested chords around the marked
    /// point, outermost first.
    pub bubble_ladders: BTreeMap<String, Vec<f64>>,
}

impl Chart {
    fn side_json(&self, s: &SideRef) -> Value {
        json!({
            "rect": self.rectangles[s.strip.0].name,
            "edge": if s.end == 0 { "left" } else { "right" },
        })
    }

    pub fn to_json(&self) -> Value {
        let rectangles: Vec<Value> = self
            .rectangles
            .iter()
            .map(|r| json!({ "id": r.name, "width": r.width, "height": r.height }))
            .collect();
        let identifications: Vec<Value> = self
            .identifications
            .iter()
            .map(|i| {
                json!({
                    "chord": i.chord.0,
                    "side": self.side_json(&i.side),
                    "from": i.from,
                    "to": i.to,
                    "partner_side": self.side_json(&i.partner_side),
                    "partner_from": i.partner_from,
                    "partner_to": i.partner_to,
                    "reversed": i.reversed,
                })
            })
            .collect();
        let singularities: Vec<Value> = self
            .singularities
            .iter()
            .map(|s| {
                json!({
                    "k": s.k,
                    "orbit": s.orbit,
                    "kind": s.kind.as_str(),
                    "count": s.count,
                    "open": s.open,
                })
            })
            .collect();
        let boundary: Vec<Value> = self
            .boundary_polygon
            .iter()
            .map(|b| {
                json!({
                    "side": self.side_json(&b.side),
                    "from": b.from,
                    "to": b.to,
                    "orbit_label": b.label,
                })
            })
            .collect();
        let accumulation: Vec<Value> = self
            .accumulation_points
            .iter()
            .map(|a| json!({ "label": a.label, "kind": a.kind.as_str() }))
            .collect();
        json!({
            "rectangles": rectangles,
            "identifications": identifications,
            "singularities": singularities,
            "boundary": boundary,
            "accumulation": accumulation,
            "finite": self.finite,
            "genus": self.genus,
            "tail_bound": self.tail_bound,
        })
    }
}

/// Result of the Euler count over point classes.
#[derive(Debug, Clone, Copy)]
pub struct SingularityReport {
    /// `4 − 4g` for the declared genus.
    pub expected: i64,
    /// `Σ (2 − k)` over closed interior classes and points at infinity.
    pub closed_balance: i64,
    /// Classes touching the unidentified boundary.
    pub open_classes: usize,
    pub finite: bool,
    /// The balance, asserted only for finite charts.
    pub balance: Option<i64>,
    pub pass: Option<bool>,
}

impl SingularityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "expected": self.expected,
            "closed_balance": self.closed_balance,
            "open_classes": self.open_classes,
            "finite": self.finite,
            "balance": self.balance,
            "pass": self.pass,
        })
    }
}

/// Check the Euler count of a chart's point classes against the genus.
///
/// Interior classes are surface points with their sector count as prong
/// count; rim classes dissolve into the collapsing complementary regions,
/// whose circuits each contribute one point at infinity instead.  For a
/// finite chart the prong deficits of interior classes and circuit points
/// must sum to exactly `4 − 4g`.  A truncated chart leaves open classes
/// along its boundary polygon; only the closed interior part is summed and
/// no verdict is issued.
pub fn singularity_check(chart: &Chart, genus: u32) -> SingularityReport {
    let expected = 4i64 - 4 * i64::from(genus);
    let closed_balance: i64 = chart
        .classes
        .iter()
        .filter(|c| !c.open && !c.boundary)
        .map(|c| 2 - c.prongs as i64)
        .sum::<i64>()
        + chart
            .infinity_prongs
            .iter()
            .map(|&k| 2 - k as i64)
            .sum::<i64>();
    let open_classes = chart.classes.iter().filter(|c| c.open).count();
    let (balance, pass) = if chart.finite {
        (Some(closed_balance), Some(closed_balance == expected))
    } else {
        (None, None)
    };
    SingularityReport {
        expected,
        closed_balance,
        open_classes,
        finite: chart.finite,
        balance,
        pass,
    }
}

/// Minimal union–find with path halving; roots are minimal indices so class
/// enumeration is deterministic.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// One stacked interval on a gate: a chord foot with its height range.
#[derive(Debug, Clone)]
struct StackInterval {
    chord: ChordId,
    lo: f64,
    hi: f64,
}

/// Assemble the flat chart of the invariant foliation.
///
/// The weights must pass their switch conditions within a pinned tolerance
/// (plus the truncation allowance); otherwise the stacks would not fit their
/// sides and the construction refuses to start.  On success:
///
/// * every strip is a rectangle of its Perron width and height;
/// * every chord identifies two vertical-side intervals of its weight;
/// * point classes, the singularity table, the boundary polygon and the
///   accumulation points are all populated;
/// * the interval ladders used by the modulus constructions are precomputed.
pub fn build_chart(
    sys: &ThickMapSystem,
    inv: &InvariantTrack,
    w: &WeightAssignment,
    perron: &PerronData,
) -> Result<Chart, ChartError> {
    let report = check_switch_conditions(sys, inv, w, SWITCH_TOL);
    if !report.pass {
        return Err(ChartError::SwitchFailure {
            residual: report.worst,
            allowance: report.allowance,
        });
    }
    let census = ngon_census(sys, inv)?;
    let n_gates = sys.graph.gates.len();

    // --- Stacks: sort each gate's chord feet into flush intervals. ---------
    let mut raw: Vec<Vec<(crate::graph::Address, ChordId, bool)>> = vec![Vec::new(); n_gates];
    for c in inv.track.chords() {
        raw[c.entry.0].push((c.entry_foot.clone(), c.id, false));
        raw[c.exit.0].push((c.exit_foot.clone(), c.id, true));
    }
    let weight_of = |id: ChordId| w.infinitesimal.get(&id).copied().unwrap_or(0.0);
    let mut stacks: Vec<Vec<StackInterval>> = Vec::with_capacity(n_gates);
    let mut slot: BTreeMap<(u32, bool), (usize, usize)> = BTreeMap::new();
    let mut residual = vec![0.0f64; n_gates];
    for (g, mut feet) in raw.into_iter().enumerate() {
        feet.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut stack = Vec::with_capacity(feet.len());
        let mut h = 0.0f64;
        for (i, (_, id, exit)) in feet.into_iter().enumerate() {
            let y = weight_of(id);
            slot.insert((id.0, exit), (g, i));
            stack.push(StackInterval { chord: id, lo: h, hi: h + y });
            h += y;
        }
        let side = w.real[sys.graph.gate(GateIdx(g)).strip.0];
        let r = side - h;
        residual[g] = if r > FULL_COVER_EPS { r } else { 0.0 };
        stacks.push(stack);
    }

    // --- Nodes: stack boundaries, plus a top corner above any residual. ----
    let mut base = vec![0usize; n_gates];
    let mut total = 0usize;
    for g in 0..n_gates {
        base[g] = total;
        total += stacks[g].len() + 1 + usize::from(residual[g] > 0.0);
    }
    let top_node = |g: usize| {
        base[g] + stacks[g].len() + usize::from(residual[g] > 0.0)
    };

    let mut uf = UnionFind::new(total);

    // Chord gluings.  In gate coordinates the gluing always reverses, so a
    // foot's lower endpoint meets its partner foot's upper endpoint.
    for c in inv.track.chords() {
        let (ga, i) = slot[&(c.id.0, false)];
        let (gb, j) = slot[&(c.id.0, true)];
        uf.union(base[ga] + i, base[gb] + j + 1);
        uf.union(base[ga] + i + 1, base[gb] + j);
    }

    // Free gaps: each collapses to a point joining the top of one gate to
    // the bottom of the counterclockwise-next gate.
    for jn in &sys.graph.junctions {
        let m = jn.boundary.len();
        for (idx, &g) in jn.boundary.iter().enumerate() {
            let g_next = jn.boundary[(idx + 1) % m];
            uf.union(top_node(g.0), base[g_next.0]);
        }
    }

    // Marked-point rays anchor a class: the pinch inside the innermost chord
    // enclosing the marked point when one is materialized, otherwise the
    // class of the declared host gap.
    let mut anchored: BTreeMap<usize, String> = BTreeMap::new();
    for (jidx, jn) in sys.graph.junctions.iter().enumerate() {
        let Some(mp) = &jn.marked else { continue };
        let innermost = inv
            .track
            .chords_at(JunctionIdx(jidx))
            .filter(|c| c.encloses_marked)
            .max_by_key(|c| (c.depth, c.id));
        let node = match innermost {
            Some(c) => {
                let (ga, i) = slot[&(c.id.0, false)];
                let (_, j) = slot[&(c.id.0, true)];
                base[ga] + i.min(j) + 1
            }
            None => top_node(mp.attach_after.0),
        };
        let root = uf.find(node);
        anchored.entry(root).or_insert_with(|| mp.orbit.clone());
    }

    // --- Point classes. ----------------------------------------------------
    let mut class_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut node_class = vec![usize::MAX; total];
    let mut classes: Vec<PointClass> = Vec::new();
    for g in 0..n_gates {
        let m = stacks[g].len();
        let res = residual[g];
        let gate = sys.graph.gate(GateIdx(g));
        let side = w.real[gate.strip.0];
        let count = m + 1 + usize::from(res > 0.0);
        for j in 0..count {
            let at_top_corner = res > 0.0 && j == m + 1;
            let gate_h = if at_top_corner {
                side
            } else if j == m {
                stacks[g].last().map_or(0.0, |iv| iv.hi)
            } else {
                stacks[g][j].lo
            };
            let corner = at_top_corner || j == 0 || (j == m && res == 0.0);
            let open = res > 0.0 && j >= m;
            let rect_h = if gate.end == 0 { gate_h } else { side - gate_h };
            let node = base[g] + j;
            let root = uf.find(node);
            let ci = *class_of_root.entry(root).or_insert_with(|| {
                classes.push(PointClass {
                    label: String::new(),
                    corners: 0,
                    interior: 0,
                    prongs: 0,
                    marked_orbit: None,
                    open: false,
                    boundary: false,
                    anchor: (gate.strip, gate.end, rect_h),
                });
                classes.len() - 1
            });
            node_class[node] = ci;
            if corner {
                classes[ci].corners += 1;
            } else {
                classes[ci].interior += 1;
            }
            classes[ci].open |= open;
            classes[ci].boundary |= corner || open;
        }
    }
    for (i, c) in classes.iter_mut().enumerate() {
        c.label = format!("P{i}");
        c.prongs = (c.corners + 2 * c.interior) / 2;
    }
    for (root, orbit) in &anchored {
        let ci = class_of_root[root];
        classes[ci].marked_orbit = Some(orbit.clone());
    }

    // --- Boundary circuits of a finite chart. ------------------------------
    // Horizontal rectangle edges chain the rim classes: height zero is the
    // stack bottom on the end-0 side but the stack top on the end-1 side.
    // Each connected circuit encloses one collapsing complementary region,
    // whose point at infinity collects the rim classes' excess angle.
    let mut infinity_prongs: Vec<usize> = Vec::new();
    if inv.is_finite() {
        let mut side_gate = vec![[usize::MAX; 2]; sys.graph.strips.len()];
        for g in 0..n_gates {
            let gate = sys.graph.gate(GateIdx(g));
            side_gate[gate.strip.0][usize::from(gate.end)] = g;
        }
        let mut cuf = UnionFind::new(classes.len());
        for sides in &side_gate {
            let (g0, g1) = (sides[0], sides[1]);
            cuf.union(node_class[base[g0]], node_class[top_node(g1)]);
            cuf.union(node_class[top_node(g0)], node_class[base[g1]]);
        }
        let mut excess: BTreeMap<usize, usize> = BTreeMap::new();
        for (ci, c) in classes.iter().enumerate() {
            if c.boundary {
                *excess.entry(cuf.find(ci)).or_insert(0) += c.prongs.saturating_sub(1);
            }
        }
        infinity_prongs = excess.into_values().collect();
    }

    // --- Rectangles and identifications. -----------------------------------
    let rectangles: Vec<Rectangle> = sys
        .graph
        .strips
        .iter()
        .enumerate()
        .map(|(i, s)| Rectangle {
            strip: StripIdx(i),
            name: s.name.clone(),
            width: perron.x[i],
            height: w.real[i],
        })
        .collect();

    let mut identifications = Vec::new();
    for c in inv.track.chords() {
        let (ga, i) = slot[&(c.id.0, false)];
        let (gb, j) = slot[&(c.id.0, true)];
        let gate_a = sys.graph.gate(GateIdx(ga));
        let gate_b = sys.graph.gate(GateIdx(gb));
        let ya = w.real[gate_a.strip.0];
        let yb = w.real[gate_b.strip.0];
        let (alo, ahi) = (stacks[ga][i].lo, stacks[ga][i].hi);
        let (blo, bhi) = (stacks[gb][j].lo, stacks[gb][j].hi);
        let (afrom, ato) = if gate_a.end == 0 { (alo, ahi) } else { (ya - ahi, ya - alo) };
        let (bfrom, bto) = if gate_b.end == 0 { (blo, bhi) } else { (yb - bhi, yb - blo) };
        identifications.push(Identification {
            chord: c.id,
            side: SideRef { strip: gate_a.strip, end: gate_a.end },
            from: afrom,
            to: ato,
            partner_side: SideRef { strip: gate_b.strip, end: gate_b.end },
            partner_from: bfrom,
            partner_to: bto,
            reversed: (gate_a.end == 1) == (gate_b.end == 1),
        });
    }

    // --- Boundary polygon: the unidentified residual segments. -------------
    let mut boundary_polygon = Vec::new();
    for g in 0..n_gates {
        if residual[g] <= 0.0 {
            continue;
        }
        let gate = sys.graph.gate(GateIdx(g));
        let side = w.real[gate.strip.0];
        let m = stacks[g].len();
        let carried = stacks[g].last().map_or(0.0, |iv| iv.hi);
        let (from, to) = if gate.end == 0 { (carried, side) } else { (0.0, side - carried) };
        boundary_polygon.push(BoundarySegment {
            side: SideRef { strip: gate.strip, end: gate.end },
            from,
            to,
            label: classes[node_class[base[g] + m]].label.clone(),
        });
    }

    // --- Ladders feeding the annulus constructions. ------------------------
    // Toward infinity: on the fullest residual stack, merge consecutive
    // intervals of the same chord into groups.  The group widths shrink
    // toward the accumulation corner, which may sit at either end of the
    // stack, so read the groups in both directions and keep the longer
    // strictly decreasing run: outermost rung first, the residual being the
    // unmaterialized mass between the innermost rung and the corner.
    fn decreasing_prefix(widths: impl Iterator<Item = f64>) -> Vec<f64> {
        let mut rungs: Vec<f64> = Vec::new();
        for width in widths {
            if width <= 0.0 {
                break;
            }
            if let Some(&prev) = rungs.last() {
                if width >= prev {
                    break;
                }
            }
            rungs.push(width);
        }
        rungs
    }
    let best = (0..n_gates)
        .filter(|&g| residual[g] > 0.0)
        .max_by_key(|&g| (stacks[g].len(), std::cmp::Reverse(g)));
    let (infinity_ladder, infinity_residual) = match best {
        None => (Vec::new(), 0.0),
        Some(g) => {
            let mut groups: Vec<(ChordId, f64)> = Vec::new();
            for iv in stacks[g].iter() {
                match groups.last_mut() {
                    Some((id, sum)) if *id == iv.chord => *sum += iv.hi - iv.lo,
                    _ => groups.push((iv.chord, iv.hi - iv.lo)),
                }
            }
            let upward = decreasing_prefix(groups.iter().map(|&(_, w)| w));
            let downward = decreasing_prefix(groups.iter().rev().map(|&(_, w)| w));
            let rungs = if downward.len() > upward.len() { downward } else { upward };
            (rungs, residual[g])
        }
    };

    // Toward each marked orbit: nested enclosing chords at the orbit's best
    // junction, one weight per depth, strictly decreasing.
    let mut bubble_ladders: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (jidx, jn) in sys.graph.junctions.iter().enumerate() {
        let Some(mp) = &jn.marked else { continue };
        let mut per_depth: BTreeMap<usize, (u32, f64)> = BTreeMap::new();
        for c in inv.track.chords_at(JunctionIdx(jidx)) {
            if !c.encloses_marked {
                continue;
            }
            let y = weight_of(c.id);
            per_depth
                .entry(c.depth)
                .and_modify(|e| {
                    if c.id.0 < e.0 {
                        *e = (c.id.0, y);
                    }
                })
                .or_insert((c.id.0, y));
        }
        let mut ladder: Vec<f64> = Vec::new();
        for (_, (_, y)) in per_depth {
            if y <= 0.0 {
                break;
            }
            if let Some(&prev) = ladder.last() {
                if y >= prev {
                    break;
                }
            }
            ladder.push(y);
        }
        let entry = bubble_ladders.entry(mp.orbit.clone()).or_default();
        if ladder.len() > entry.len() {
            *entry = ladder;
        }
    }

    // --- Singularity table. -------------------------------------------------
    let mut singularities = Vec::new();
    for (idx, o) in census.orbits.iter().enumerate() {
        let (count, open) = match o.kind {
            GonKind::Periodic { period } => (period, false),
            GonKind::SemiInfinite => (0, true),
        };
        singularities.push(Singularity {
            k: o.n,
            orbit: format!("gon-{idx}"),
            kind: SingularityKind::Gon,
            count,
            open,
        });
    }
    let mut marked_by_orbit: BTreeMap<&str, Vec<&PointClass>> = BTreeMap::new();
    for c in &classes {
        if let Some(o) = &c.marked_orbit {
            marked_by_orbit.entry(o).or_default().push(c);
        }
    }
    for (orbit, cs) in marked_by_orbit {
        singularities.push(Singularity {
            k: cs[0].prongs,
            orbit: orbit.to_string(),
            kind: SingularityKind::Marked,
            count: cs.len(),
            open: cs.iter().any(|c| c.open),
        });
    }
    for (i, &k) in infinity_prongs.iter().enumerate() {
        let orbit = if infinity_prongs.len() == 1 {
            "infinity".to_string()
        } else {
            format!("infinity-{i}")
        };
        singularities.push(Singularity {
            k,
            orbit,
            kind: SingularityKind::Infinity,
            count: 1,
            open: false,
        });
    }

    // --- Accumulation points: limits of the semi-infinite gon orbits. ------
    let mut acc: BTreeMap<String, AccumulationKind> = BTreeMap::new();
    for o in &census.orbits {
        match &o.limit {
            Some(LimitKind::Marked { orbit }) => {
                acc.insert(orbit.clone(), AccumulationKind::MarkedOrbit);
            }
            Some(LimitKind::Infinity) => {
                acc.insert("infinity".to_string(), AccumulationKind::Infinity);
            }
            None => {}
        }
    }
    let accumulation_points = acc
        .into_iter()
        .map(|(label, kind)| AccumulationPoint { label, kind })
        .collect();

    Ok(Chart {
        rectangles,
        identifications,
        singularities,
        boundary_polygon,
        accumulation_points,
        classes,
        tail_bound: w.tail_bound,
        genus: sys.graph.genus,
        finite: inv.is_finite(),
        infinity_prongs,
        infinity_ladder,
        infinity_residual,
        bubble_ladders,
    })
}
