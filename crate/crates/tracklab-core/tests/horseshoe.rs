//! End-to-end checks on the binary horseshoe: one strip doubled over itself,
//! one unmarked fold junction, and one marked fixed junction.
//!
//! Every quantity of this system is solvable in closed form — λ = 2, bubble
//! weights 2^{-k}, annulus bounds 1/(3π(n + 3/4)) — so the pipeline output is
//! compared against exact values throughout.

use std::f64::consts::{LN_2, PI};

use tracklab_core::chart::{build_chart, puncture_test, singularity_check, AccumulationKind, Verdict};
use tracklab_core::graph::{
    critical_points, euler_characteristic, face_orbits, parse_system, serialize_system,
    solve_arrangement, validate_system, CriticalLocus, GateIdx, ItemKey, JunctionIdx, StripIdx,
    ThickMapSystem,
};
use tracklab_core::measure::{check_switch_conditions, complete_weights, exact_weights, MeasureError};
use tracklab_core::spectral::{
    backward_itineraries, bowen_entropy, entropy, perron_eigen, transition_matrix, GraphPoint,
};
use tracklab_core::track::{
    default_period_max, invariant_track, ngon_census, track_blocks, ChordId, GonKind, LimitKind,
};

const DATA: &str = include_str!("../../../data/horseshoe.json");

fn system() -> ThickMapSystem {
    parse_system(DATA).expect("fixture parses")
}

fn gate(sys: &ThickMapSystem, name: &str) -> GateIdx {
    GateIdx(
        sys.graph
            .gates
            .iter()
            .position(|g| g.name == name)
            .expect("gate exists"),
    )
}

fn junction(sys: &ThickMapSystem, name: &str) -> JunctionIdx {
    JunctionIdx(
        sys.graph
            .junctions
            .iter()
            .position(|j| j.name == name)
            .expect("junction exists"),
    )
}

#[test]
fn fixture_is_canonical_and_valid() {
    let sys = system();
    assert_eq!(serialize_system(&sys), DATA, "fixture is in canonical form");
    let report = validate_system(&sys);
    assert!(report.is_valid());
    assert!(report.findings.is_empty(), "no warnings either: {:?}", report.findings);
}

#[test]
fn thickened_graph_is_a_disk() {
    let sys = system();
    assert_eq!(euler_characteristic(&sys.graph), 2);
    assert_eq!(face_orbits(&sys.graph).len(), 1);
}

#[test]
fn fold_sits_inside_the_strip() {
    let sys = system();
    let locus = critical_points(&sys);
    assert_eq!(
        locus,
        vec![CriticalLocus::InteriorFold { strip: StripIdx(0), index: 0 }]
    );
}

#[test]
fn both_image_disks_attach_on_the_marked_gate() {
    let sys = system();
    let arr = solve_arrangement(&sys).expect("planar arrangement");
    let l = gate(&sys, "l");
    let r = gate(&sys, "r");

    let mut on_l = arr.items(l).to_vec();
    on_l.sort();
    assert_eq!(on_l, vec![ItemKey::Att { source: l }, ItemKey::Att { source: r }]);

    let mut on_r = arr.items(r).to_vec();
    on_r.sort();
    assert_eq!(
        on_r,
        vec![
            ItemKey::Foot { strip: StripIdx(0), pos: 0, side: 0 },
            ItemKey::Foot { strip: StripIdx(0), pos: 0, side: 1 },
        ]
    );

    let passages: Vec<_> = arr.passages().to_vec();
    assert_eq!(passages.len(), 1);
    assert!(passages[0].is_turn());
    assert_eq!(passages[0].entry, r);
}

#[test]
fn doubling_map_spectral_data() {
    let sys = system();
    let m = transition_matrix(&sys);
    assert_eq!(m.labels, vec!["e1"]);
    assert_eq!(m.entries, vec![vec![2]]);

    let perron = perron_eigen(&m, 1e-9).expect("irreducible");
    assert_eq!(perron.lambda, 2.0);
    assert_eq!(perron.lambda_integer, Some(2));
    assert_eq!(perron.y, vec![1.0]);
    assert_eq!(perron.x, vec![1.0]);

    let h = entropy(&sys).expect("entropy");
    assert!((h - LN_2).abs() <= 1e-12);
}

#[test]
fn bowen_estimate_brackets_the_entropy() {
    let sys = system();
    let est = bowen_entropy(&sys, 14, 1e-3).expect("bowen estimate");
    assert!(est >= 0.60, "estimate {est} too small");
    assert!(est <= LN_2 + 1e-9, "estimate {est} exceeds the entropy");
}

#[test]
fn tent_map_backward_branches() {
    let sys = system();
    let start = GraphPoint { strip: StripIdx(0), t: 0.25 };
    let its = backward_itineraries(&sys, start, 3).expect("branches");
    assert_eq!(its.len(), 8, "a tent map has 2^k backward branches");

    let mut ends: Vec<f64> = its.iter().map(|it| it.points.last().unwrap().t).collect();
    ends.sort_by(f64::total_cmp);
    let expected = [1.0, 7.0, 9.0, 15.0, 17.0, 23.0, 25.0, 31.0].map(|n| n / 32.0);
    for (got, want) in ends.iter().zip(expected) {
        assert!((got - want).abs() <= 1e-9, "branch endpoint {got} vs {want}");
    }
    for it in &its {
        assert_eq!(it.points.len(), 4);
        assert_eq!(it.points[0], start);
    }
}

/// The push-forward never stabilizes: each iterate adds one more bubble, so
/// the layers grow with period one along a single chord chain.
#[test]
fn track_is_a_single_infinite_chain() {
    let sys = system();
    let inv = invariant_track(&sys, 12, default_period_max(&sys)).expect("track");

    assert!(!inv.is_finite());
    assert_eq!(inv.layer_period, 1);
    assert_eq!(inv.depth, 12);
    assert_eq!(inv.seeds.len(), 1);
    assert!(inv.periodic_part.is_empty());

    let chords = inv.track.chords();
    assert_eq!(chords.len(), 12);
    let mut depths: Vec<usize> = chords.iter().map(|c| c.depth).collect();
    depths.sort();
    assert_eq!(depths, (1..=12).collect::<Vec<_>>());
    assert!(chords.iter().all(|c| c.is_bubble()));
    assert!(chords.iter().all(|c| !c.encloses_marked));

    // The chord map is one chain seed → deepest, visiting every chord.
    let mut cur = inv.seeds[0];
    let mut seen = vec![cur];
    while let Some(&next) = inv.sigma.get(&cur) {
        seen.push(next);
        cur = next;
    }
    assert_eq!(seen.len(), 12);

    let r = junction(&sys, "R");
    let l = junction(&sys, "L");
    assert_eq!(inv.track.chords_at(r).count(), 1);
    assert_eq!(inv.track.chords_at(l).count(), 11);
}

#[test]
fn census_is_one_escaping_chain_of_monogons() {
    let sys = system();
    let inv = invariant_track(&sys, 12, default_period_max(&sys)).expect("track");
    let census = ngon_census(&sys, &inv).expect("census");

    assert_eq!(census.orbits.len(), 1);
    let orbit = &census.orbits[0];
    assert_eq!(orbit.n, 1);
    assert_eq!(orbit.kind, GonKind::SemiInfinite);
    assert!(orbit.trivial);
    assert_eq!(orbit.limit, Some(LimitKind::Infinity));
    assert_eq!(orbit.representative.junction, junction(&sys, "R"));
    assert_eq!(orbit.representative.chords, vec![inv.seeds[0]]);
    assert_eq!(
        census.orbits.iter().filter(|o| matches!(o.kind, GonKind::Periodic { .. })).count(),
        0
    );
}

#[test]
fn blocks_couple_the_turn_to_the_strip() {
    let sys = system();
    let inv = invariant_track(&sys, 12, default_period_max(&sys)).expect("track");
    let blocks = track_blocks(&sys, &inv).expect("blocks");

    assert_eq!(blocks.real.entries, vec![vec![2]]);
    let rows: Vec<(ChordId, Vec<u64>)> =
        blocks.infinitesimal.iter().map(|(&k, v)| (k, v.clone())).collect();
    assert_eq!(rows, vec![(inv.seeds[0], vec![1])]);
    assert_eq!(blocks.sigma, inv.sigma);
}

#[test]
fn bubble_weights_halve_with_depth() {
    let sys = system();
    let depth = 20;
    let inv = invariant_track(&sys, depth, default_period_max(&sys)).expect("track");
    let blocks = track_blocks(&sys, &inv).expect("blocks");
    let perron = perron_eigen(&blocks.real, 1e-9).expect("perron");
    let w = complete_weights(&blocks, &perron, depth as u32).expect("weights");

    // Gate-level tail: 2·|B|·|Y|·λ^{-K}/(λ−1) = 2^{1-K}.
    assert_eq!(w.tail_bound, 2f64.powi(-(depth as i32) + 1));
    for c in inv.track.chords() {
        let y = w.infinitesimal[&c.id];
        let want = 2f64.powi(-(c.depth as i32));
        assert!(
            (y - want).abs() <= w.tail_bound,
            "depth {} weight {y} vs {want}",
            c.depth
        );
    }

    let report = check_switch_conditions(&sys, &inv, &w, 1e-9);
    assert!(report.pass, "worst {} allowance {}", report.worst, report.allowance);
    assert!(report.worst <= w.tail_bound);
    assert!(report.worst <= 2.0 * w.tail_bound + 1e-12);
}

#[test]
fn exact_weights_need_a_finite_track() {
    let sys = system();
    let inv = invariant_track(&sys, 12, default_period_max(&sys)).expect("track");
    let blocks = track_blocks(&sys, &inv).expect("blocks");
    assert!(matches!(
        exact_weights(&blocks, &inv, 2),
        Err(MeasureError::InfiniteTrack)
    ));
}

fn chart_at(depth: usize) -> (ThickMapSystem, tracklab_core::chart::Chart) {
    let sys = system();
    let inv = invariant_track(&sys, depth, default_period_max(&sys)).expect("track");
    let blocks = track_blocks(&sys, &inv).expect("blocks");
    let perron = perron_eigen(&blocks.real, 1e-9).expect("perron");
    let w = complete_weights(&blocks, &perron, depth as u32).expect("weights");
    let chart = build_chart(&sys, &inv, &w, &perron).expect("chart");
    (sys, chart)
}

#[test]
fn chart_is_one_unit_square_with_folded_sides() {
    let (_, chart) = chart_at(12);

    assert_eq!(chart.rectangles.len(), 1);
    assert_eq!(chart.rectangles[0].width, 1.0);
    assert_eq!(chart.rectangles[0].height, 1.0);
    assert!(!chart.finite);

    // One identification per chord, each a reversed gluing of two intervals
    // on the same vertical side.
    assert_eq!(chart.identifications.len(), 12);
    assert!(chart.identifications.iter().all(|i| i.reversed));
    assert!(chart.identifications.iter().all(|i| i.side == i.partner_side));
    let on_marked_side = chart
        .identifications
        .iter()
        .filter(|i| i.side.end == 0)
        .count();
    assert_eq!(on_marked_side, 11);

    // Interval accounting on the marked side: glued intervals plus the free
    // residual segment tile the whole side.
    let glued: f64 = chart
        .identifications
        .iter()
        .filter(|i| i.side.end == 0)
        .map(|i| (i.to - i.from) + (i.partner_to - i.partner_from))
        .sum();
    let res = 2f64.powi(-11);
    assert!((glued - (1.0 - res)).abs() <= 1e-12);

    assert_eq!(chart.boundary_polygon.len(), 1);
    let seg = &chart.boundary_polygon[0];
    assert_eq!(seg.side.end, 0);
    assert!((seg.from - (1.0 - res)).abs() <= 1e-12);
    assert_eq!(seg.to, 1.0);

    assert_eq!(chart.accumulation_points.len(), 1);
    assert_eq!(chart.accumulation_points[0].label, "infinity");
    assert_eq!(chart.accumulation_points[0].kind, AccumulationKind::Infinity);

    // Ladder toward the accumulation corner: rung widths 2^{-1} … 2^{-11}.
    let want: Vec<f64> = (1..=11).map(|k| 2f64.powi(-k)).collect();
    assert_eq!(chart.infinity_ladder, want);
    assert_eq!(chart.infinity_residual, res);
}

#[test]
fn chart_point_classes_and_singularities() {
    let (_, chart) = chart_at(12);

    let marked: Vec<_> = chart
        .classes
        .iter()
        .filter(|c| c.marked_orbit.is_some())
        .collect();
    assert_eq!(marked.len(), 1);
    assert_eq!(marked[0].marked_orbit.as_deref(), Some("p"));
    assert!(marked[0].open, "marked class is unresolved at finite depth");

    let one_pronged_closed = chart
        .classes
        .iter()
        .filter(|c| c.prongs == 1 && !c.open)
        .count();
    assert_eq!(one_pronged_closed, 13);

    // The fold tip glues the two corners of the folded side: a rim class of
    // a single half-turn, regular once the outer region collapses.
    let crease = chart
        .classes
        .iter()
        .find(|c| c.boundary && !c.open && c.corners == 2 && c.interior == 0)
        .expect("fold tip class");
    assert_eq!(crease.prongs, 1);

    let kinds: Vec<(&str, usize, bool)> = chart
        .singularities
        .iter()
        .map(|s| (s.kind.as_str(), s.k, s.open))
        .collect();
    assert!(kinds.contains(&("gon", 1, true)), "escaping monogon: {kinds:?}");
    assert!(kinds.iter().any(|&(kind, _, _)| kind == "marked"));
    assert!(
        !kinds.iter().any(|&(kind, _, _)| kind == "infinity"),
        "truncated boundary never closes up: {kinds:?}"
    );

    let report = singularity_check(&chart, 0);
    assert!(!report.finite);
    assert_eq!(report.balance, None);
    assert_eq!(report.expected, 4);
    assert!(chart.infinity_prongs.is_empty());
}

#[test]
fn nested_annuli_certify_the_puncture() {
    let (_, chart) = chart_at(24);
    let cert = puncture_test(&chart, "infinity", 12).expect("certificate");

    assert_eq!(cert.bounds.len(), 12);
    for (i, &b) in cert.bounds.iter().enumerate() {
        let n = (i + 1) as f64;
        let exact = 1.0 / (3.0 * PI * (n + 0.75));
        assert!(
            (b - exact).abs() <= 1e-12 * exact.abs().max(1.0),
            "annulus {n}: bound {b} vs exact {exact}"
        );
    }

    assert_eq!(cert.verdict, Verdict::DivergesLikeLog);
    let (_, slope, err) = cert.fit.expect("affine fit of reciprocal bounds");
    assert!((slope - 3.0 * PI).abs() <= 1e-6);
    assert!(err <= 1e-9, "fit error {err}");
    let c = cert.minorant.expect("log minorant");
    assert!(c > 0.0);
    assert!(*cert.partial_sums.last().unwrap() >= c * 12f64.ln() - 1e-12);
}

#[test]
fn unknown_accumulation_labels_are_rejected() {
    let (_, chart) = chart_at(12);
    assert!(puncture_test(&chart, "nowhere", 8).is_err());
}
