//! Census of complementary polygons (n-gons) of the invariant track.
//!
//! Inside each junction disk the chords form a non-crossing diagram; its
//! faces are traced by walking boundary gaps and jumping across chords.  A
//! face is an *n-gon* when every boundary piece stays inside a single gate
//! (regions meeting the free boundary escape to the surface boundary or a
//! puncture and are not polygons) and the face does not contain the marked
//! point.  The chord map sends gons to gons; their orbits are either
//! periodic or leave the materialized depth — semi-infinite.  For a
//! semi-infinite orbit the limit is read off the deepest materialized face:
//! if its feet prefixes descend the marked-predecessor disk chain the gons
//! converge to that marked orbit, otherwise they pile up toward the
//! puncture at infinity.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::graph::{
    solve_arrangement, Arrangement, Bound, ItemKey, JunctionIdx, ThickMapSystem,
};

use super::chord::{circle_point, in_ccw_arc, ChordId, ChordSet, FootRole};
use super::push::InvariantTrack;
use super::TrackError;

/// Orbit behaviour of a gon under the chord map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GonKind {
    Periodic { period: usize },
    SemiInfinite,
}

/// Where a semi-infinite gon orbit accumulates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitKind {
    /// The gons converge to the marked periodic orbit with this label.
    Marked { orbit: String },
    /// The gons pile up toward the puncture at infinity.
    Infinity,
}

/// A representative gon: its junction and bounding chords.
#[derive(Debug, Clone)]
pub struct GonRef {
    pub junction: JunctionIdx,
    pub chords: Vec<ChordId>,
}

/// One orbit of n-gons.
#[derive(Debug, Clone)]
pub struct GonOrbit {
    /// Number of bounding chords (= cusps = prongs of the singularity).
    pub n: usize,
    pub kind: GonKind,
    pub representative: GonRef,
    /// Limit of a semi-infinite orbit.
    pub limit: Option<LimitKind>,
    /// 1-gon closing off an unpunctured disk.
    pub trivial: bool,
}

#[derive(Debug, Clone, Default)]
pub struct NGonCensus {
    pub orbits: Vec<GonOrbit>,
}

impl NGonCensus {
    pub fn to_json(&self, sys: &ThickMapSystem) -> Value {
        let orbits: Vec<Value> = self
            .orbits
            .iter()
            .map(|o| {
                json!({
                    "n": o.n,
                    "kind": match o.kind {
                        GonKind::Periodic { .. } => "periodic",
                        GonKind::SemiInfinite => "semi_infinite",
                    },
                    "period": match o.kind {
                        GonKind::Periodic { period } => Some(period),
                        GonKind::SemiInfinite => None,
                    },
                    "junction": sys.graph.junction(o.representative.junction).name,
                    "chords": o.representative.chords.iter().map(|c| c.0).collect::<Vec<_>>(),
                    "limit": o.limit.as_ref().map(|l| match l {
                        LimitKind::Marked { orbit } => json!({ "orbit": orbit }),
                        LimitKind::Infinity => json!("infinity"),
                    }),
                    "trivial": o.trivial,
                })
            })
            .collect();
        json!({ "orbits": orbits })
    }
}

struct RawFace {
    junction: JunctionIdx,
    /// Bounding chords, sorted (the face key).
    chord_ids: Vec<ChordId>,
    /// Boundary arcs (counterclockwise from, to), one per gap.
    arcs: Vec<(crate::graph::CirclePoint, crate::graph::CirclePoint)>,
    /// Number of chord crossings of the face walk.
    n: usize,
    /// Every boundary arc stays within one gate.
    clean: bool,
}

/// Enumerate the faces of the chord diagram in every junction.
fn trace_faces(sys: &ThickMapSystem, inv: &InvariantTrack) -> Vec<RawFace> {
    let mut faces = Vec::new();
    for j in 0..sys.graph.junctions.len() {
        let j = JunctionIdx(j);
        let chords: Vec<_> = inv.track.chords_at(j).collect();
        if chords.is_empty() {
            continue;
        }
        let mut pts: Vec<(crate::graph::CirclePoint, ChordId, FootRole)> = Vec::new();
        for c in &chords {
            pts.push((
                circle_point(sys, c.entry, &c.entry_foot.0, Bound::Point),
                c.id,
                FootRole::Entry,
            ));
            pts.push((
                circle_point(sys, c.exit, &c.exit_foot.0, Bound::Point),
                c.id,
                FootRole::Exit,
            ));
        }
        pts.sort_by(|a, b| a.0.cmp(&b.0));
        let m = pts.len();
        let partner: Vec<usize> = (0..m)
            .map(|i| {
                (0..m)
                    .find(|&k| k != i && pts[k].1 == pts[i].1)
                    .expect("chord has two feet")
            })
            .collect();

        let mut seen = vec![false; m];
        for start in 0..m {
            if seen[start] {
                continue;
            }
            // Face orbit: gap g (between points g and g+1) jumps across the
            // chord at its right end to resume at the partner foot.
            let mut gaps = Vec::new();
            let mut g = start;
            loop {
                if seen[g] {
                    break;
                }
                seen[g] = true;
                gaps.push(g);
                g = partner[(g + 1) % m];
            }
            let mut chord_ids: Vec<ChordId> =
                gaps.iter().map(|&g| pts[(g + 1) % m].1).collect();
            chord_ids.sort();
            chord_ids.dedup();
            let clean = gaps.iter().all(|&g| {
                g + 1 < m && pts[g].0.gate_slot == pts[g + 1].0.gate_slot
            });
            let arcs = gaps
                .iter()
                .map(|&g| (pts[g].0.clone(), pts[(g + 1) % m].0.clone()))
                .collect();
            faces.push(RawFace {
                junction: j,
                chord_ids,
                arcs,
                n: gaps.len(),
                clean,
            });
        }
    }
    faces
}

/// Does the face contain the junction's marked point?  Same disk descent as
/// for chords: if the bounding chords dive into the marked predecessor's
/// image disk, the question moves to the face their parents bound there.
fn face_marked(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    set: &ChordSet,
    faces: &[RawFace],
    index: &BTreeMap<(usize, Vec<ChordId>), usize>,
    fidx: usize,
) -> bool {
    let f = &faces[fidx];
    let Some(pred) = sys.marked_predecessor(f.junction) else {
        return false;
    };
    let legs: Vec<_> = sys
        .graph
        .junction(pred)
        .boundary
        .iter()
        .map(|&g0| arr.att_position(sys, g0))
        .collect();

    let dives = |id: ChordId| {
        set.get(id)
            .and_then(|c| c.parent)
            .and_then(|p| set.get(p))
            .is_some_and(|p| p.junction == pred)
    };
    let diving: Vec<bool> = f.chord_ids.iter().map(|&id| dives(id)).collect();
    if diving.iter().any(|&d| d) {
        if !diving.iter().all(|&d| d) {
            return false;
        }
        let mut parents: Vec<ChordId> = f
            .chord_ids
            .iter()
            .filter_map(|&id| set.get(id).and_then(|c| c.parent))
            .collect();
        parents.sort();
        parents.dedup();
        let Some(&pf) = index.get(&(pred.0, parents)) else {
            return false;
        };
        return face_marked(sys, arr, set, faces, index, pf);
    }

    let mut all_in = true;
    for &(lg, li) in &legs {
        let lo = circle_point(sys, lg, &[li], Bound::Lo);
        let hi = circle_point(sys, lg, &[li], Bound::Hi);
        let inside = f
            .arcs
            .iter()
            .any(|(from, to)| in_ccw_arc(&lo, from, to) && in_ccw_arc(&hi, from, to));
        all_in &= inside;
    }
    all_in && !legs.is_empty()
}

/// Limit of a semi-infinite orbit, read from its deepest materialized face:
/// the gons converge to the junction's marked orbit exactly when the feet
/// prefixes follow the marked-predecessor disk chain all the way down.
fn limit_of(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    set: &ChordSet,
    face: &RawFace,
) -> LimitKind {
    let Some(c) = face.chord_ids.first().and_then(|&id| set.get(id)) else {
        return LimitKind::Infinity;
    };
    let Some(marked) = sys.graph.junction(face.junction).marked.as_ref() else {
        return LimitKind::Infinity;
    };
    let addr = &c.entry_foot.0;
    if addr.len() < 2 {
        return LimitKind::Infinity;
    }
    let mut j = face.junction;
    let mut gate = c.entry;
    for level in 0..addr.len() - 1 {
        let Some(pred) = sys.marked_predecessor(j) else {
            return LimitKind::Infinity;
        };
        let ItemKey::Att { source } = arr.items(gate)[addr[level]] else {
            return LimitKind::Infinity;
        };
        if sys.graph.gate(source).junction != pred {
            return LimitKind::Infinity;
        }
        gate = source;
        j = pred;
    }
    LimitKind::Marked {
        orbit: marked.orbit.clone(),
    }
}

/// Classify the orbits of complementary polygons of the invariant track.
pub fn ngon_census(sys: &ThickMapSystem, inv: &InvariantTrack) -> Result<NGonCensus, TrackError> {
    let arr = solve_arrangement(sys).map_err(crate::graph::NestingError::from)?;
    let set = ChordSet(inv.track.chords());
    let faces = trace_faces(sys, inv);
    let index: BTreeMap<(usize, Vec<ChordId>), usize> = faces
        .iter()
        .enumerate()
        .map(|(i, f)| ((f.junction.0, f.chord_ids.clone()), i))
        .collect();

    // Gons: clean faces not containing the marked point.
    let gon: Vec<bool> = (0..faces.len())
        .map(|i| faces[i].clean && !face_marked(sys, &arr, &set, &faces, &index, i))
        .collect();

    // Chord map on gons.
    let image: Vec<Option<usize>> = faces
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if !gon[i] {
                return None;
            }
            let mut target: Vec<ChordId> = Vec::new();
            for &id in &f.chord_ids {
                target.push(*inv.sigma.get(&id)?);
            }
            target.sort();
            target.dedup();
            let ji = sys.junction_image[f.junction.0];
            let &t = index.get(&(ji.0, target))?;
            (gon[t]).then_some(t)
        })
        .collect();

    let mut in_deg = vec![0usize; faces.len()];
    for &t in image.iter().flatten() {
        in_deg[t] += 1;
    }

    let key = |i: usize| (faces[i].junction.0, faces[i].chord_ids.clone());
    let mut order: Vec<usize> = (0..faces.len()).filter(|&i| gon[i]).collect();
    order.sort_by_key(|&i| key(i));

    let mut visited = vec![false; faces.len()];
    let mut orbits = Vec::new();

    // Chains: start at gons with no materialized preimage, walk forward.
    for &start in order.iter().filter(|&&i| in_deg[i] == 0) {
        if visited[start] {
            continue;
        }
        let mut chain = vec![start];
        visited[start] = true;
        let mut cur = start;
        while let Some(next) = image[cur] {
            if visited[next] {
                break;
            }
            visited[next] = true;
            chain.push(next);
            cur = next;
        }
        let last = *chain.last().unwrap();
        orbits.push(make_orbit(
            &set,
            &faces,
            start,
            GonKind::SemiInfinite,
            Some(limit_of(sys, &arr, &set, &faces[last])),
        ));
    }

    // Remaining gons lie on cycles.
    for &start in &order {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut cur = start;
        while let Some(next) = image[cur] {
            if next == start {
                break;
            }
            if visited[next] {
                break;
            }
            visited[next] = true;
            cycle.push(next);
            cur = next;
        }
        let rep = *cycle.iter().min_by_key(|&&i| key(i)).unwrap();
        orbits.push(make_orbit(
            &set,
            &faces,
            rep,
            GonKind::Periodic {
                period: cycle.len(),
            },
            None,
        ));
    }

    orbits.sort_by_key(|o| {
        (
            o.n,
            match o.kind {
                GonKind::Periodic { period } => (0, period),
                GonKind::SemiInfinite => (1, 0),
            },
            o.representative.junction.0,
            o.representative.chords.clone(),
        )
    });
    Ok(NGonCensus { orbits })
}

fn make_orbit(
    set: &ChordSet,
    faces: &[RawFace],
    rep: usize,
    kind: GonKind,
    limit: Option<LimitKind>,
) -> GonOrbit {
    let f = &faces[rep];
    let trivial = f.n == 1
        && f.chord_ids
            .first()
            .and_then(|&id| set.get(id))
            .is_some_and(|c| !c.encloses_marked);
    GonOrbit {
        n: f.n,
        kind,
        representative: GonRef {
            junction: f.junction,
            chords: f.chord_ids.clone(),
        },
        limit,
        trivial,
    }
}
