//! Backward orbits of critical points and one-pronged classification.
//!
//! A critical point `p` maps to a junction, and the image of a small arc
//! through `p` doubles back there as a turn.  Pulling that turn backward one
//! preimage at a time produces a nest of turn copies, one level deeper each
//! step; the point is *one-pronged* when at every step the innermost copy in
//! the nest belongs to an actual preimage of the current point, so the nest
//! selects a well-defined backward orbit `p, p_{-1}, p_{-2}, ...`.
//!
//! Which preimage is innermost depends on what the turn closes around.  When
//! the critical junction and its image junction carry marked points of the
//! same orbit, the image turn closes around the image marked point, and the
//! turn copies nest down onto that point through the attached images of the
//! junction disks.  The innermost preimage of a marked point is the marked
//! point of its orbit predecessor — a hairpin arc around it maps to a turn
//! with its tip exactly on the current point, deeper than any strand copy —
//! so the backward orbit is the marked orbit run in reverse, and it closes
//! up periodically.
//!
//! Otherwise the turn closes around the cusp pinched between the folded germ
//! pair, and the nest descends through the image strand whose passage
//! crosses the critical junction along exactly that pair of germs.  The
//! backward point is then interior to that strand's source strip, at the
//! edge of its cross-section on the cusp side, and every further preimage is
//! interior as well: each step reads the innermost item at that edge of the
//! cross-section and descends into the strand it belongs to.  Reading flips
//! at arriving ends (the two gate lists of a strip are order-reversing
//! images of each other), a single orientation bit tracks the edge, and the
//! itinerary of strips visited is eventually periodic: the orbit rides the
//! free boundary sides backward toward the point at infinity.
//!
//! Three outcomes are possible: the orbit returns to `p`
//! ([`ProngOutcome::Periodic`]), it leaves the junctions for good
//! ([`ProngOutcome::ToInfinity`]), or at some step no structure — or no
//! unique one — is an eligible preimage, and the nest pinches more than one
//! prong onto the point ([`ProngOutcome::NoOnePronged`]).

use serde_json::{json, Value};
use std::collections::BTreeMap;

use crate::graph::{
    critical_points, germ_image, solve_arrangement, Arrangement, CriticalLocus, EdgeStep, Gate,
    GateIdx, Germ, ItemKey, JunctionIdx, NestingError, StripIdx, ThickMapSystem,
};

use super::TrackError;

/// One point of a backward critical orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProngPoint {
    /// The marked centre of a junction.
    Vertex { junction: String },
    /// An interior point of a strip's core edge.
    Interior { strip: String },
}

/// Fate of the backward orbit selected by the nested turn copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProngOutcome {
    /// The orbit returns to the critical point: `points` lists
    /// `p_{-1}, ..., p_{-period}` with the last entry equal to `p`.
    Periodic { period: usize, points: Vec<ProngPoint> },
    /// The orbit leaves the junctions for good; after the listed
    /// pre-periodic points it repeats the strip itinerary `cycle` forever.
    ToInfinity {
        pre_period: Vec<ProngPoint>,
        cycle: Vec<String>,
    },
    /// At backward step `step` the innermost structure at the comparison
    /// site is not a preimage of the current point.
    NoOnePronged { step: usize },
}

/// Classification of the backward orbit of one critical locus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProngEntry {
    pub locus: CriticalLocus,
    pub outcome: ProngOutcome,
}

/// Outcomes for every critical point of the system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProngClassification {
    pub entries: Vec<ProngEntry>,
}

impl ProngClassification {
    /// True when no critical point failed the innermost-copy test.
    pub fn all_one_pronged(&self) -> bool {
        self.entries
            .iter()
            .all(|e| !matches!(e.outcome, ProngOutcome::NoOnePronged { .. }))
    }

    pub fn to_json(&self, sys: &ThickMapSystem) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                let locus = match e.locus {
                    CriticalLocus::VertexFold { junction } => json!({
                        "kind": "vertex_fold",
                        "junction": sys.graph.junction(junction).name,
                    }),
                    CriticalLocus::InteriorFold { strip, index } => json!({
                        "kind": "interior_fold",
                        "strip": sys.graph.strip(strip).name,
                        "passage": index,
                    }),
                };
                json!({ "locus": locus, "outcome": outcome_json(&e.outcome) })
            })
            .collect();
        json!({ "critical_points": entries })
    }
}

fn point_json(p: &ProngPoint) -> Value {
    match p {
        ProngPoint::Vertex { junction } => json!({ "kind": "vertex", "junction": junction }),
        ProngPoint::Interior { strip } => json!({ "kind": "interior", "strip": strip }),
    }
}

fn outcome_json(o: &ProngOutcome) -> Value {
    match o {
        ProngOutcome::Periodic { period, points } => json!({
            "kind": "periodic",
            "period": period,
            "points": points.iter().map(point_json).collect::<Vec<_>>(),
        }),
        ProngOutcome::ToInfinity { pre_period, cycle } => json!({
            "kind": "to_infinity",
            "pre_period": pre_period.iter().map(point_json).collect::<Vec<_>>(),
            "cycle": cycle,
        }),
        ProngOutcome::NoOnePronged { step } => json!({
            "kind": "no_one_pronged",
            "step": step,
        }),
    }
}

/// Backward point interior to `strip`, pinned to one edge of its
/// cross-section: `parity` is true when the nest side lies toward ascending
/// item positions on the strip's end-0 gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct InteriorState {
    strip: StripIdx,
    parity: bool,
}

fn gate_germ(gate: &Gate) -> Germ {
    Germ {
        strip: gate.strip,
        end: gate.end,
    }
}

fn germ_gate(sys: &ThickMapSystem, germ: Germ) -> GateIdx {
    sys.graph.strip(germ.strip).ends[germ.end as usize]
}

fn step_initial_germ(step: EdgeStep) -> Germ {
    Germ {
        strip: step.strip,
        end: if step.forward { 0 } else { 1 },
    }
}

fn step_terminal_germ(step: EdgeStep) -> Germ {
    Germ {
        strip: step.strip,
        end: if step.forward { 1 } else { 0 },
    }
}

/// The item closest to the nest side on gate `g`: the last item when that
/// side lies toward ascending positions, the first otherwise.
fn tip_item(arr: &Arrangement, g: GateIdx, parity: bool) -> Option<ItemKey> {
    let items = arr.items(g);
    if parity {
        items.last().copied()
    } else {
        items.first().copied()
    }
}

/// The image strand a crossing item on an end gate of some strip belongs
/// to: the strip whose image path makes the crossing, and whether the item
/// sits at the strand's arriving end (where its refinement reads the
/// cross-section reversed).
fn item_strand(sys: &ThickMapSystem, item: ItemKey) -> (StripIdx, bool) {
    match item {
        // Entry feet are arriving ends of the run before the passage; exit
        // feet are departing ends of the run after it.
        ItemKey::Foot { strip, side, .. } => (strip, side == 0),
        // An attachment interval is the departing end of the source path's
        // first run (end 0) or the arriving end of its last run (end 1).
        ItemKey::Att { source } => {
            let gate = sys.graph.gate(source);
            (gate.strip, gate.end == 1)
        }
    }
}

/// The folded germ pair at a vertex-fold junction, if the fold consists of
/// exactly one pair sharing one image germ.
fn folded_pair(sys: &ThickMapSystem, w: JunctionIdx) -> Option<(Germ, Germ)> {
    let mut by_image: BTreeMap<Germ, Vec<Germ>> = BTreeMap::new();
    for &gx in &sys.graph.junction(w).boundary {
        let gm = gate_germ(sys.graph.gate(gx));
        by_image.entry(germ_image(sys, gm)).or_default().push(gm);
    }
    let mut folded: Vec<Vec<Germ>> = by_image.into_values().filter(|v| v.len() > 1).collect();
    if folded.len() != 1 || folded[0].len() != 2 {
        return None;
    }
    let mut pair = folded.pop().unwrap();
    pair.sort();
    Some((pair[0], pair[1]))
}

/// The junction whose marked point maps onto the marked point of `q`: the
/// member of the same orbit that the junction map sends to `q`.  `None` when
/// no such junction exists or several do.
fn orbit_predecessor(sys: &ThickMapSystem, q: JunctionIdx, orbit: &str) -> Option<JunctionIdx> {
    let mut found = None;
    for (i, &im) in sys.junction_image.iter().enumerate() {
        if im != q {
            continue;
        }
        let x = JunctionIdx(i);
        match &sys.graph.junction(x).marked {
            Some(m) if m.orbit == orbit => {
                if found.is_some() {
                    return None;
                }
                found = Some(x);
            }
            _ => continue,
        }
    }
    found
}

/// Backward orbit of a vertex fold at `j0`.
fn classify_vertex_fold(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    j0: JunctionIdx,
    max_steps: usize,
) -> Result<ProngOutcome, TrackError> {
    let Some((g1, g2)) = folded_pair(sys, j0) else {
        return Ok(ProngOutcome::NoOnePronged { step: 0 });
    };
    let v = sys.junction_image[j0.0];
    let orbit = match (&sys.graph.junction(j0).marked, &sys.graph.junction(v).marked) {
        (Some(a), Some(b)) if a.orbit == b.orbit => Some(a.orbit.clone()),
        _ => None,
    };
    if let Some(orbit) = orbit {
        // The image turn closes around the image marked point, so the
        // innermost preimage at every step is the marked point of the orbit
        // predecessor: walk the marked orbit in reverse until it closes.
        let mut points = Vec::new();
        let mut q = j0;
        for step in 1..=max_steps {
            let Some(pred) = orbit_predecessor(sys, q, &orbit) else {
                return Ok(ProngOutcome::NoOnePronged { step });
            };
            points.push(ProngPoint::Vertex {
                junction: sys.graph.junction(pred).name.clone(),
            });
            if pred == j0 {
                return Ok(ProngOutcome::Periodic {
                    period: step,
                    points,
                });
            }
            q = pred;
        }
        return Err(TrackError::StepsExhausted { max_steps });
    }
    // The turn closes around the cusp pinched between the folded germs; the
    // nest descends through the image strand crossing `j0` along that pair.
    let mut matched: Vec<(StripIdx, Germ)> = Vec::new();
    for (i, path) in sys.edge_image.iter().enumerate() {
        for pos in 0..path.steps.len().saturating_sub(1) {
            let here = sys
                .graph
                .gate(sys.graph.step_terminal_gate(path.steps[pos]))
                .junction;
            if here != j0 {
                continue;
            }
            let entry = step_terminal_germ(path.steps[pos]);
            let exit = step_initial_germ(path.steps[pos + 1]);
            if (entry == g1 && exit == g2) || (entry == g2 && exit == g1) {
                matched.push((StripIdx(i), exit));
            }
        }
    }
    if matched.len() != 1 {
        // no eligible strand, or several competing for innermost
        return Ok(ProngOutcome::NoOnePronged { step: 1 });
    }
    let (strip, exit) = matched[0];
    // The cusp sits at the boundary corner between the folded gates.  At the
    // passage's exit foot the strand's refinement reads as the source
    // strip's own end-0 cross-section, so the nest side is ascending exactly
    // when the corner follows the exit gate in boundary order.
    let exit_gate = germ_gate(sys, exit);
    let entry_gate = germ_gate(sys, if exit == g1 { g2 } else { g1 });
    let bd = &sys.graph.junction(j0).boundary;
    let xi = bd.iter().position(|&g| g == exit_gate).unwrap();
    let parity = bd[(xi + 1) % bd.len()] == entry_gate;
    let start = InteriorState { strip, parity };
    let points = vec![ProngPoint::Interior {
        strip: sys.graph.strip(strip).name.clone(),
    }];
    interior_walk(sys, arr, start, points, false, max_steps)
}

/// Initial state for an interior fold: the critical point is pinched
/// between the two feet of the turning passage.
fn interior_fold_state(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    strip: StripIdx,
    index: usize,
) -> InteriorState {
    let steps = &sys.edge_image[strip.0].steps;
    let gate = sys.graph.step_terminal_gate(steps[index]);
    let p0 = arr.position(
        gate,
        &ItemKey::Foot {
            strip,
            pos: index,
            side: 0,
        },
    );
    let p1 = arr.position(
        gate,
        &ItemKey::Foot {
            strip,
            pos: index,
            side: 1,
        },
    );
    // Anchoring on the entry foot: the nest side lies toward the exit foot,
    // and the entry foot is the arriving end of its run, so the
    // cross-section copy inside it is reversed.
    InteriorState {
        strip,
        parity: p0 >= p1,
    }
}

/// Follow the interior itinerary until its state repeats.  The walk is a
/// deterministic function of (strip, nest side), so a repeated state closes
/// the itinerary cycle.  `seed_is_critical` marks the initial state as the
/// critical point itself (an interior fold) rather than an already-listed
/// backward point, in which case it is excluded from the listing.
fn interior_walk(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    start: InteriorState,
    mut points: Vec<ProngPoint>,
    seed_is_critical: bool,
    max_steps: usize,
) -> Result<ProngOutcome, TrackError> {
    let mut trace: Vec<InteriorState> = vec![start];
    let mut state = start;
    let first_step = if seed_is_critical { 1 } else { 2 };
    for step in first_step..=max_steps {
        let g0 = sys.graph.strip(state.strip).ends[0];
        let Some(item) = tip_item(arr, g0, state.parity) else {
            return Ok(ProngOutcome::NoOnePronged { step });
        };
        let (s, arriving) = item_strand(sys, item);
        let next = InteriorState {
            strip: s,
            parity: state.parity ^ arriving,
        };
        if let Some(k) = trace.iter().position(|&t| t == next) {
            let cycle_states: Vec<InteriorState> = if seed_is_critical && k == 0 {
                // The cycle runs through the critical point itself; list it
                // starting from the first backward point.
                let mut c = trace[1..].to_vec();
                c.push(trace[0]);
                c
            } else {
                trace[k..].to_vec()
            };
            let pre_len = if seed_is_critical { k.saturating_sub(1) } else { k };
            points.truncate(pre_len);
            let cycle = cycle_states
                .iter()
                .map(|t| sys.graph.strip(t.strip).name.clone())
                .collect();
            return Ok(ProngOutcome::ToInfinity {
                pre_period: points,
                cycle,
            });
        }
        trace.push(next);
        points.push(ProngPoint::Interior {
            strip: sys.graph.strip(s).name.clone(),
        });
        state = next;
    }
    Err(TrackError::StepsExhausted { max_steps })
}

fn classify_locus(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    locus: &CriticalLocus,
    max_steps: usize,
) -> Result<ProngOutcome, TrackError> {
    match *locus {
        CriticalLocus::VertexFold { junction } => {
            classify_vertex_fold(sys, arr, junction, max_steps)
        }
        CriticalLocus::InteriorFold { strip, index } => {
            let start = interior_fold_state(sys, arr, strip, index);
            interior_walk(sys, arr, start, Vec::new(), true, max_steps)
        }
    }
}

/// Classify the backward orbit of every critical point.
pub fn one_prong_orbits(
    sys: &ThickMapSystem,
    max_steps: usize,
) -> Result<ProngClassification, TrackError> {
    let arr = solve_arrangement(sys).map_err(NestingError::from)?;
    let mut entries = Vec::new();
    for locus in critical_points(sys) {
        let outcome = classify_locus(sys, &arr, &locus, max_steps)?;
        entries.push(ProngEntry { locus, outcome });
    }
    Ok(ProngClassification { entries })
}
