//! Push-forward of train tracks and the invariant track construction.
//!
//! One push-forward step carries every existing chord into the image disk of
//! its junction and adds one chord per junction passage of the edge-image
//! paths, then removes parallel duplicates (earlier-created chords win).
//! Iterating from the initial track either stabilizes — no new chords appear
//! and the track is finite — or settles into periodic growth, detected by
//! comparing the multisets of per-layer chord shapes under the forward
//! junction relabeling.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::graph::{derive_nesting, Address, Arrangement, ItemKey, ThickMapSystem, TurnNesting};

use super::chord::{
    between_arcs, between_contains_marked, chord_side_contains_marked, circle_point, in_ccw_arc,
    Chord, ChordId, ChordSet, FootRole, TrainTrack,
};
use super::TrackError;
use crate::graph::Bound;

/// The track before any push-forward: the real edges alone, no chords.
pub fn initial_track() -> TrainTrack {
    TrainTrack::new()
}

/// Default cap for the generation-period search: the least common multiple
/// of the marked-orbit periods.
pub fn default_period_max(sys: &ThickMapSystem) -> u32 {
    sys.orbit_period_lcm().max(1)
}

/// Result of one push-forward step.
#[derive(Debug, Clone)]
pub struct PushStep {
    pub track: TrainTrack,
    /// Each input chord id mapped to the representative of its image.
    pub sigma: BTreeMap<ChordId, ChordId>,
    /// Representative chord of each junction passage, in passage order.
    pub strand_reps: Vec<ChordId>,
}

/// One push-forward step: carry every chord into the image disk of its
/// junction, add one chord per junction passage, remove parallel duplicates.
pub fn push_forward(
    tr: &TrainTrack,
    sys: &ThickMapSystem,
    nesting: &TurnNesting,
) -> Result<PushStep, TrackError> {
    if nesting.depth() < 1 {
        return Err(TrackError::InsufficientNesting);
    }
    let arr = nesting.arrangement();
    let mut work: Vec<Chord> = tr.chords().to_vec();
    let first_new = work.last().map_or(0, |c| c.id.0 + 1);
    let mut next = first_new;
    let mut redirect: BTreeMap<ChordId, ChordId> = BTreeMap::new();
    // Raw image target per input chord, before parallel merging.
    let mut image_of: BTreeMap<ChordId, ChordId> = BTreeMap::new();
    // Raw chord per junction passage, before parallel merging.
    let mut strand_raw: Vec<ChordId> = Vec::new();

    // Candidates from the junction passages of the edge-image paths.
    for (i, p) in arr.passages().iter().enumerate() {
        let entry_foot = Address(vec![arr.position(
            p.entry,
            &ItemKey::Foot {
                strip: p.strip,
                pos: p.pos,
                side: 0,
            },
        )]);
        let exit_foot = Address(vec![arr.position(
            p.exit,
            &ItemKey::Foot {
                strip: p.strip,
                pos: p.pos,
                side: 1,
            },
        )]);
        let encloses_marked = nesting.turns().get(i).is_some_and(|t| {
            debug_assert_eq!(t.depth, 1);
            t.encloses_marked
        });
        let cand = Chord {
            id: ChordId(0), // assigned on insertion
            junction: p.junction,
            entry: p.entry,
            exit: p.exit,
            entry_foot,
            exit_foot,
            depth: tr.depth + 1,
            parent: None,
            encloses_marked,
        };
        strand_raw.push(insert_candidate(&mut work, &mut next, cand));
    }

    // Candidates from the images of the existing chords.
    for c in tr.chords() {
        let (entry, entry_foot) = arr.push_point(sys, c.entry, &c.entry_foot);
        let (exit, exit_foot) = arr.push_point(sys, c.exit, &c.exit_foot);
        let mut cand = Chord {
            id: ChordId(0),
            junction: sys.junction_image[c.junction.0],
            entry,
            exit,
            entry_foot,
            exit_foot,
            depth: tr.depth + 1,
            parent: Some(c.id),
            encloses_marked: false,
        };
        let (from, to) = if cand.is_bubble() {
            cand.span_roles()
        } else {
            (FootRole::Entry, FootRole::Exit)
        };
        cand.encloses_marked =
            chord_side_contains_marked(sys, arr, &ChordSet(&work), &cand, from, to);
        let target = insert_candidate(&mut work, &mut next, cand);
        image_of.insert(c.id, target);
    }

    // Remove parallel duplicates until none remain; a removed chord is
    // redirected to the earlier chord it is parallel to.
    loop {
        let Some((i, j)) = first_parallel_pair(sys, arr, &work, first_new) else {
            break;
        };
        redirect.insert(work[j].id, work[i].id);
        work.remove(j);
    }

    let resolve = |mut id: ChordId| {
        while let Some(&t) = redirect.get(&id) {
            id = t;
        }
        id
    };
    let sigma: BTreeMap<ChordId, ChordId> = image_of
        .into_iter()
        .map(|(src, tgt)| (src, resolve(tgt)))
        .collect();
    let strand_reps: Vec<ChordId> = strand_raw.into_iter().map(resolve).collect();

    let mut out = TrainTrack::new();
    out.depth = tr.depth + 1;
    for c in work {
        out.push(c);
    }
    Ok(PushStep {
        track: out,
        sigma,
        strand_reps,
    })
}

/// Insert a candidate chord unless an identical chord (same junction and
/// feet) already exists; returns the id it ended up as.
fn insert_candidate(work: &mut Vec<Chord>, next: &mut u32, mut cand: Chord) -> ChordId {
    for c in work.iter() {
        if c.junction != cand.junction {
            continue;
        }
        let same = (c.entry == cand.entry
            && c.entry_foot == cand.entry_foot
            && c.exit == cand.exit
            && c.exit_foot == cand.exit_foot)
            || (c.entry == cand.exit
                && c.entry_foot == cand.exit_foot
                && c.exit == cand.entry
                && c.exit_foot == cand.entry_foot);
        if same {
            return c.id;
        }
    }
    cand.id = ChordId(*next);
    *next += 1;
    let id = cand.id;
    work.push(cand);
    id
}

/// First (in creation order) parallel pair among the working chords with the
/// later member newly created this push.
fn first_parallel_pair(
    sys: &ThickMapSystem,
    arr: &Arrangement,
    work: &[Chord],
    first_new: u32,
) -> Option<(usize, usize)> {
    for j in 0..work.len() {
        if work[j].id.0 < first_new {
            continue;
        }
        for i in 0..j {
            if parallel(sys, arr, work, i, j) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Are `work[i]` and `work[j]` parallel: same junction and gate pair,
/// cobounding a region free of other chords' feet and of the marked point?
/// Side-by-side bubbles are never parallel: the region between them is not a
/// pinched annulus.
fn parallel(sys: &ThickMapSystem, arr: &Arrangement, work: &[Chord], i: usize, j: usize) -> bool {
    let (a, b) = (&work[i], &work[j]);
    if a.junction != b.junction || a.gate_pair() != b.gate_pair() {
        return false;
    }
    if a.is_bubble() {
        let (alo, ahi) = a.span();
        let (blo, bhi) = b.span();
        let nested = (alo < blo && bhi < ahi) || (blo < alo && ahi < bhi);
        if !nested {
            return false;
        }
    }
    let Some(arcs) = between_arcs(sys, a, b) else {
        return false;
    };
    for (k, o) in work.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        for (g, addr) in [(o.entry, &o.entry_foot), (o.exit, &o.exit_foot)] {
            let p = circle_point(sys, g, &addr.0, Bound::Point);
            if arcs.iter().any(|(f, t)| in_ccw_arc(&p, f, t)) {
                return false;
            }
        }
    }
    !between_contains_marked(sys, arr, &ChordSet(work), a, b)
}

/// The invariant train track, materialized to a finite depth.
#[derive(Debug, Clone)]
pub struct InvariantTrack {
    pub track: TrainTrack,
    /// Chord map induced by the thick map on the materialized chords
    /// (defined for every chord created before the final push).
    pub sigma: BTreeMap<ChordId, ChordId>,
    /// Chords that are not images of earlier chords.
    pub seeds: Vec<ChordId>,
    /// Chords on sigma-cycles; the whole chord set when the track is finite.
    pub periodic_part: Vec<ChordId>,
    /// Detected generation period (0 when the track is finite).
    pub layer_period: u32,
    pub depth: usize,
    /// Representative chord of each junction passage, in passage order.
    pub strand_reps: Vec<ChordId>,
}

impl InvariantTrack {
    pub fn is_finite(&self) -> bool {
        self.layer_period == 0
    }

    pub fn to_json(&self, sys: &ThickMapSystem) -> Value {
        let sigma: BTreeMap<String, u32> = self
            .sigma
            .iter()
            .map(|(k, v)| (k.0.to_string(), v.0))
            .collect();
        json!({
            "track": self.track.to_json(sys),
            "sigma": sigma,
            "seeds": self.seeds.iter().map(|c| c.0).collect::<Vec<_>>(),
            "periodic_part": self.periodic_part.iter().map(|c| c.0).collect::<Vec<_>>(),
            "layer_period": self.layer_period,
            "depth": self.depth,
        })
    }
}

/// Iterate push-forward from the initial track to `depth`, detecting either
/// stabilization (a finite invariant track) or periodic layer growth.
pub fn invariant_track(
    sys: &ThickMapSystem,
    depth: usize,
    period_max: u32,
) -> Result<InvariantTrack, TrackError> {
    let nesting = derive_nesting(sys, 1)?;
    let mut tr = initial_track();
    let mut sigma: BTreeMap<ChordId, ChordId> = BTreeMap::new();
    let mut strand_reps: Vec<ChordId> = Vec::new();
    let mut stabilized = false;
    for _ in 0..depth {
        let before = tr.chords().len();
        let step = push_forward(&tr, sys, &nesting)?;
        // Later pushes recompute the image of every chord against the grown
        // track; the freshest assignment is the binding one.
        sigma.extend(step.sigma);
        strand_reps = step.strand_reps;
        let after = step.track.chords().len();
        tr = step.track;
        if after == before {
            stabilized = true;
            break;
        }
    }

    let layer_period = if stabilized {
        0
    } else {
        detect_layer_period(sys, &tr, period_max).ok_or(TrackError::Inconclusive {
            depth,
            period_max,
        })?
    };

    let alive: BTreeSet<ChordId> = tr.chords().iter().map(|c| c.id).collect();
    let in_image: BTreeSet<ChordId> = sigma.values().copied().collect();
    let seeds: Vec<ChordId> = alive
        .iter()
        .copied()
        .filter(|id| !in_image.contains(id))
        .collect();
    let periodic_part = if stabilized {
        alive.iter().copied().collect()
    } else {
        sigma_cycles(&sigma)
    };

    Ok(InvariantTrack {
        depth: tr.depth,
        track: tr,
        sigma,
        seeds,
        periodic_part,
        layer_period,
        strand_reps,
    })
}

/// Chord ids lying on cycles of the chord map.
fn sigma_cycles(sigma: &BTreeMap<ChordId, ChordId>) -> Vec<ChordId> {
    let mut on_cycle: BTreeSet<ChordId> = BTreeSet::new();
    let mut done: BTreeSet<ChordId> = BTreeSet::new();
    for &start in sigma.keys() {
        if done.contains(&start) {
            continue;
        }
        let mut path: Vec<ChordId> = Vec::new();
        let mut seen: BTreeMap<ChordId, usize> = BTreeMap::new();
        let mut cur = start;
        loop {
            if done.contains(&cur) {
                break;
            }
            if let Some(&at) = seen.get(&cur) {
                on_cycle.extend(path[at..].iter().copied());
                break;
            }
            seen.insert(cur, path.len());
            path.push(cur);
            match sigma.get(&cur) {
                Some(&n) => cur = n,
                None => break,
            }
        }
        done.extend(path);
    }
    on_cycle.into_iter().collect()
}

/// Smallest generation period `p` such that, over the deepest layers, the
/// multiset of chord shapes at layer `k + p` equals the layer-`k` multiset
/// carried forward by `p` steps of the junction and gate maps.
fn detect_layer_period(sys: &ThickMapSystem, tr: &TrainTrack, period_max: u32) -> Option<u32> {
    let depth = tr.depth;
    'outer: for p in 1..=period_max as usize {
        if depth < p + 2 {
            break;
        }
        // Skip the transient: compare only a tail window of layer pairs.
        let k_start = 1.max(depth.saturating_sub(2 * p + 2));
        if depth - p < k_start + 1 {
            continue;
        }
        for k in k_start..=depth - p {
            let shifted: Vec<String> = {
                let mut v: Vec<String> = tr
                    .layer(k)
                    .map(|c| {
                        let mut j = c.junction;
                        let (mut ge, mut gx) = (c.entry, c.exit);
                        for _ in 0..p {
                            j = sys.junction_image[j.0];
                            ge = sys.gate_image(ge);
                            gx = sys.gate_image(gx);
                        }
                        let (lo, hi) = if ge <= gx { (ge, gx) } else { (gx, ge) };
                        format!("{}:{}:{}:{}", j.0, lo.0, hi.0, c.encloses_marked)
                    })
                    .collect();
                v.sort();
                v
            };
            let actual: Vec<String> = {
                let mut v: Vec<String> = tr
                    .layer(k + p)
                    .map(|c| {
                        let (lo, hi) = c.gate_pair();
                        format!("{}:{}:{}:{}", c.junction.0, lo.0, hi.0, c.encloses_marked)
                    })
                    .collect();
                v.sort();
                v
            };
            if shifted != actual {
                continue 'outer;
            }
        }
        return Some(p as u32);
    }
    None
}
