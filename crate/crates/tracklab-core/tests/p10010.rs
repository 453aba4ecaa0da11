//! End-to-end checks on the "10010" system: five junctions in a line, four
//! strips, every junction carrying one point of a single period-5 marked
//! orbit, and a vertex fold at the middle junction.  The growth rate is the
//! largest root of t⁴ − t³ − t² − t + 1 ≈ 1.7220838, a quartic unit rather
//! than an integer, so unlike the horseshoe the invariant track stabilizes to
//! a finite chord system whose weights close the switches only in the limit
//! of the full weight series.

use std::collections::BTreeMap;

use tracklab_core::chart::{build_chart, singularity_check, AccumulationKind, Chart};
use tracklab_core::graph::{
    critical_points, euler_characteristic, face_orbits, parse_system, serialize_system,
    validate_system, CriticalLocus, GateIdx, JunctionIdx, ThickMapSystem,
};
use tracklab_core::measure::{
    check_switch_conditions, complete_weights, exact_weights, MeasureError, WeightAssignment,
};
use tracklab_core::spectral::{
    classify_matrix, entropy, perron_eigen, transition_matrix, MatrixClass, PerronData,
};
use tracklab_core::track::{
    default_period_max, invariant_track, ngon_census, one_prong_orbits, track_blocks, ChordId,
    GonKind, InvariantTrack, LimitKind, ProngOutcome, ProngPoint,
};

const DATA: &str = include_str!("../../../data/p10010.json");

/// Largest root of t⁴ − t³ − t² − t + 1, the growth rate of the system.
const LAMBDA: f64 = 1.722_083_805_739_042_2;
/// ln(LAMBDA).
const LN_LAMBDA: f64 = 0.543_535_072_497_869_5;

fn system() -> ThickMapSystem {
    parse_system(DATA).expect("fixture parses")
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

fn gate(sys: &ThickMapSystem, name: &str) -> GateIdx {
    GateIdx(
        sys.graph
            .gates
            .iter()
            .position(|g| g.name == name)
            .expect("gate exists"),
    )
}

/// The unique chord of the invariant track at `name` with the given depth.
fn chord_id(sys: &ThickMapSystem, inv: &InvariantTrack, name: &str, depth: usize) -> ChordId {
    let j = junction(sys, name);
    let mut matching = inv.track.chords_at(j).filter(|c| c.depth == depth);
    let c = matching.next().unwrap_or_else(|| panic!("chord at {name} depth {depth}"));
    assert!(
        matching.next().is_none(),
        "more than one chord at {name} depth {depth}"
    );
    c.id
}

fn track() -> (ThickMapSystem, InvariantTrack) {
    let sys = system();
    let inv = invariant_track(&sys, 24, default_period_max(&sys)).expect("track");
    (sys, inv)
}

fn weights() -> (ThickMapSystem, InvariantTrack, PerronData, WeightAssignment) {
    let (sys, inv) = track();
    let blocks = track_blocks(&sys, &inv).expect("blocks");
    let perron = perron_eigen(&blocks.real, 1e-12).expect("perron");
    let w = complete_weights(&blocks, &perron, 400).expect("weights");
    (sys, inv, perron, w)
}

fn chart() -> (ThickMapSystem, InvariantTrack, PerronData, Chart) {
    let (sys, inv, perron, w) = weights();
    let chart = build_chart(&sys, &inv, &w, &perron).expect("chart");
    (sys, inv, perron, chart)
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
fn spine_thickens_to_a_disk() {
    let sys = system();
    assert_eq!(euler_characteristic(&sys.graph), 2);
    assert_eq!(face_orbits(&sys.graph).len(), 1);
}

#[test]
fn fold_sits_at_the_middle_junction() {
    let sys = system();
    assert_eq!(
        critical_points(&sys),
        vec![CriticalLocus::VertexFold { junction: junction(&sys, "V3") }]
    );
}

#[test]
fn quartic_spectral_data() {
    let sys = system();
    let m = transition_matrix(&sys);
    assert_eq!(m.labels, vec!["e1", "e2", "e3", "e4"]);
    assert_eq!(
        m.entries,
        vec![
            vec![0, 0, 0, 1],
            vec![1, 0, 0, 1],
            vec![1, 0, 1, 0],
            vec![0, 1, 1, 0],
        ]
    );
    assert_eq!(classify_matrix(&m).expect("classifies"), MatrixClass::IrreducibleAperiodic);

    let perron = perron_eigen(&m, 1e-12).expect("perron");
    let lam = perron.lambda;
    assert!((lam - LAMBDA).abs() <= 1e-11, "lambda {lam}");
    assert_eq!(perron.lambda_integer, None, "the growth rate is irrational");
    let quartic = lam.powi(4) - lam.powi(3) - lam.powi(2) - lam + 1.0;
    assert!(quartic.abs() <= 1e-9, "characteristic value {quartic}");

    // Right eigenvector (heights), unit 1-norm: M y = λ y row by row.
    let y = &perron.y;
    assert!((y.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    assert!((lam * y[0] - y[3]).abs() <= 1e-9);
    assert!((lam * y[1] - (y[0] + y[3])).abs() <= 1e-9);
    assert!((lam * y[2] - (y[0] + y[2])).abs() <= 1e-9);
    assert!((lam * y[3] - (y[1] + y[2])).abs() <= 1e-9);
    assert!(y[0] < y[2] && y[2] < y[1] && y[1] < y[3]);

    // Left eigenvector (widths): x M = λ x column by column.
    let x = &perron.x;
    assert!((x.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    assert!((lam * x[0] - (x[1] + x[2])).abs() <= 1e-9);
    assert!((lam * x[1] - x[3]).abs() <= 1e-9);
    assert!((lam * x[2] - (x[2] + x[3])).abs() <= 1e-9);
    assert!((lam * x[3] - (x[0] + x[1])).abs() <= 1e-9);

    let h = entropy(&sys).expect("entropy");
    assert!((h - LN_LAMBDA).abs() <= 1e-11, "entropy {h}");
}

/// The push-forward stabilizes at depth nine.  The three junction passages
/// seed three parallel chains of crossings — the marked point lies between a
/// crossing and the existing chord it shadows, so they never merge — and the
/// chains drain into a five-cycle of bubbles walking the marked orbit.
#[test]
fn track_stabilizes_to_fifteen_chords() {
    let (sys, inv) = track();
    assert_eq!(default_period_max(&sys), 5);

    assert!(inv.is_finite());
    assert_eq!(inv.layer_period, 0);
    assert_eq!(inv.depth, 9, "one idle push past the deepest bubble");

    let chords = inv.track.chords();
    assert_eq!(chords.len(), 15);
    let mut depths: Vec<usize> = chords.iter().map(|c| c.depth).collect();
    depths.sort();
    assert_eq!(depths, vec![1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 5, 6, 7, 8]);
    assert!(
        chords.iter().all(|c| c.encloses_marked),
        "every chord wraps a marked point"
    );

    // Crossings shadow the declared junction passages for three generations.
    for (name, depth, entry, exit) in [
        ("V2", 1, "r2", "l2"),
        ("V3", 1, "l3", "r3"),
        ("V4", 1, "r4", "l4"),
        ("V3", 2, "l3", "r3"),
        ("V4", 2, "r4", "l4"),
        ("V3", 3, "l3", "r3"),
    ] {
        let id = chord_id(&sys, &inv, name, depth);
        let c = chords.iter().find(|c| c.id == id).unwrap();
        assert!(!c.is_bubble(), "crossing at {name} depth {depth}");
        assert_eq!(c.entry, gate(&sys, entry), "entry gate at {name} depth {depth}");
        assert_eq!(c.exit, gate(&sys, exit), "exit gate at {name} depth {depth}");
    }

    // Bubbles nest around the marked points.
    for (name, depth, g) in [
        ("V5", 2, "l5"),
        ("V1", 3, "r1"),
        ("V5", 3, "l5"),
        ("V2", 4, "r2"),
        ("V5", 4, "l5"),
        ("V4", 5, "r4"),
        ("V3", 6, "l3"),
        ("V5", 7, "l5"),
        ("V1", 8, "r1"),
    ] {
        let id = chord_id(&sys, &inv, name, depth);
        let c = chords.iter().find(|c| c.id == id).unwrap();
        assert!(c.is_bubble(), "bubble at {name} depth {depth}");
        assert_eq!(c.entry, gate(&sys, g), "bubble gate at {name} depth {depth}");
    }

    let counts: Vec<usize> = ["V1", "V2", "V3", "V4", "V5"]
        .iter()
        .map(|n| inv.track.chords_at(junction(&sys, n)).count())
        .collect();
    assert_eq!(counts, vec![2, 2, 4, 3, 4]);

    // The chord map: three crossing chains drain into the bubble five-cycle,
    // with every V5 bubble off the cycle folding onto the one at V1.
    let id = |name: &str, depth: usize| chord_id(&sys, &inv, name, depth);
    let expected: BTreeMap<ChordId, ChordId> = [
        (id("V3", 1), id("V5", 2)),
        (id("V4", 1), id("V3", 2)),
        (id("V2", 1), id("V4", 2)),
        (id("V5", 2), id("V1", 3)),
        (id("V3", 2), id("V5", 3)),
        (id("V4", 2), id("V3", 3)),
        (id("V1", 3), id("V2", 4)),
        (id("V5", 3), id("V1", 3)),
        (id("V3", 3), id("V5", 4)),
        (id("V2", 4), id("V4", 5)),
        (id("V5", 4), id("V1", 3)),
        (id("V4", 5), id("V3", 6)),
        (id("V3", 6), id("V5", 7)),
        (id("V5", 7), id("V1", 8)),
        (id("V1", 8), id("V2", 4)),
    ]
    .into_iter()
    .collect();
    assert_eq!(inv.sigma, expected);

    let mut seeds = inv.seeds.clone();
    seeds.sort();
    let mut expected_seeds = vec![id("V2", 1), id("V3", 1), id("V4", 1)];
    expected_seeds.sort();
    assert_eq!(seeds, expected_seeds, "the depth-1 crossings seed the chains");

    let mut all: Vec<ChordId> = chords.iter().map(|c| c.id).collect();
    all.sort();
    let mut periodic = inv.periodic_part.clone();
    periodic.sort();
    assert_eq!(periodic, all, "a stabilized track is all periodic");
}

#[test]
fn blocks_have_three_crossing_rows() {
    let (sys, inv) = track();
    let blocks = track_blocks(&sys, &inv).expect("blocks");
    assert_eq!(blocks.real.entries, transition_matrix(&sys).entries);
    assert_eq!(blocks.sigma, inv.sigma);

    let cv2 = chord_id(&sys, &inv, "V2", 1);
    let cv3 = chord_id(&sys, &inv, "V3", 1);
    let cv4 = chord_id(&sys, &inv, "V4", 1);
    let expected: BTreeMap<ChordId, Vec<u64>> = [
        (cv2, vec![0, 0, 0, 1]),
        (cv3, vec![1, 0, 0, 0]),
        (cv4, vec![0, 0, 1, 0]),
    ]
    .into_iter()
    .collect();
    assert_eq!(blocks.infinitesimal, expected);
}

/// In the weight-series limit every chord weight lands on a closed form in
/// the eigendata: each crossing chain is a geometrically damped copy of an
/// edge height, and the bubble five-cycle is damped by the growth rate step
/// by step around the marked orbit.
#[test]
fn weights_close_the_switches_at_the_quartic_root() {
    let (sys, inv, perron, w) = weights();
    assert!(w.tail_bound < 1e-80, "series truncated far below round-off");

    let y = &perron.y;
    let lam = perron.lambda;
    let wt = |name: &str, depth: usize| w.infinitesimal[&chord_id(&sys, &inv, name, depth)];
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;

    // Crossing chains: V3 carries y0, y2, y3 down its chain; V4 carries
    // y2, y3; V2 carries y3, each divided by λ per generation.
    assert!(close(wt("V3", 1), y[0] / lam), "first crossing at V3");
    assert!(close(wt("V3", 2), y[2] / lam.powi(2)), "second crossing at V3");
    assert!(close(wt("V3", 3), y[3] / lam.powi(3)), "third crossing at V3");
    assert!(close(wt("V4", 1), y[2] / lam), "first crossing at V4");
    assert!(close(wt("V4", 2), y[3] / lam.powi(2)), "second crossing at V4");
    assert!(close(wt("V2", 1), y[3] / lam), "crossing at V2");
    assert!(close(wt("V2", 1), y[0]), "the eigenvector equation λ·y0 = y3");

    // Off-cycle bubbles at V5 and V1.
    assert!(close(wt("V5", 2), y[0] / lam.powi(2)), "first bubble at V5");
    assert!(close(wt("V5", 3), y[2] / lam.powi(3)), "second bubble at V5");
    assert!(close(wt("V5", 4), y[3] / lam.powi(4)), "third bubble at V5");
    assert!(close(wt("V1", 3), y[2] / lam.powi(2)), "bubble at V1");

    // The five-cycle starts at half an edge height and is λ-damped.
    let b2 = wt("V2", 4);
    assert!(close(b2, y[3] / (2.0 * lam.powi(2))), "cycle bubble at V2");
    assert!((wt("V4", 5) - b2 / lam).abs() <= 1e-12);
    assert!((wt("V3", 6) - b2 / lam.powi(2)).abs() <= 1e-12);
    assert!((wt("V5", 7) - b2 / lam.powi(3)).abs() <= 1e-12);
    assert!((wt("V1", 8) - b2 / lam.powi(4)).abs() <= 1e-12);

    let report = check_switch_conditions(&sys, &inv, &w, 1e-9);
    assert!(report.pass, "worst {} allowance {}", report.worst, report.allowance);
    assert!(report.worst <= 1e-10, "worst residual {}", report.worst);
}

/// The growth rate is irrational, so demanding exact rational weights at any
/// integer growth fails: the kernel of M − λI is trivial.
#[test]
fn exact_weights_reject_an_integer_growth_guess() {
    let (sys, inv) = track();
    let blocks = track_blocks(&sys, &inv).expect("blocks");
    assert!(matches!(
        exact_weights(&blocks, &inv, 2),
        Err(MeasureError::DegenerateKernel { lambda: 2, dim: 0 })
    ));
}

/// Between consecutive chords of each crossing chain sits a strip of bigons
/// marching toward the marked orbit: three semi-infinite bigon chains, one
/// per chain junction plus one down the V5 bubble stack.
#[test]
fn census_has_three_bigon_chains() {
    let (sys, inv) = track();
    let census = ngon_census(&sys, &inv).expect("census");
    assert_eq!(census.orbits.len(), 3, "orbits: {:?}", census.orbits);

    let expected = [
        ("V3", [("V3", 1), ("V3", 2)]),
        ("V4", [("V4", 1), ("V4", 2)]),
        ("V5", [("V5", 4), ("V5", 7)]),
    ];
    for (orbit, (rep, chords)) in census.orbits.iter().zip(expected) {
        assert_eq!(orbit.n, 2, "bigons only");
        assert_eq!(orbit.kind, GonKind::SemiInfinite);
        assert!(!orbit.trivial);
        assert_eq!(
            orbit.limit,
            Some(LimitKind::Marked { orbit: "m".to_string() }),
            "each chain accumulates on the marked orbit"
        );
        assert_eq!(orbit.representative.junction, junction(&sys, rep));
        let ids: Vec<ChordId> =
            chords.iter().map(|&(n, d)| chord_id(&sys, &inv, n, d)).collect();
        assert_eq!(orbit.representative.chords, ids, "representative at {rep}");
    }
}

#[test]
fn fold_orbit_is_periodic_of_period_five() {
    let sys = system();
    let prongs = one_prong_orbits(&sys, 64).expect("prongs");
    assert!(prongs.all_one_pronged());
    assert_eq!(prongs.entries.len(), 1);
    assert_eq!(
        prongs.entries[0].locus,
        CriticalLocus::VertexFold { junction: junction(&sys, "V3") }
    );
    let vertex = |n: &str| ProngPoint::Vertex { junction: n.to_string() };
    assert_eq!(
        prongs.entries[0].outcome,
        ProngOutcome::Periodic {
            period: 5,
            points: vec![vertex("V4"), vertex("V2"), vertex("V1"), vertex("V5"), vertex("V3")],
        }
    );
}

/// The finite track closes up: five one-pronged marked points in the
/// interior and a single three-pronged point at infinity on the boundary
/// circuit, balancing Σ(2 − k) = 5·1 − 1 = 4 for the sphere.
#[test]
fn chart_closes_up_with_one_point_at_infinity() {
    let (_, _, perron, chart) = chart();
    assert!(chart.finite);
    assert_eq!(chart.genus, 0);

    assert_eq!(chart.rectangles.len(), 4);
    let names: Vec<&str> = chart.rectangles.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, vec!["e1", "e2", "e3", "e4"]);

    assert_eq!(chart.identifications.len(), 15, "one gluing per chord");
    let reversed = chart.identifications.iter().filter(|i| i.reversed).count();
    assert_eq!(reversed, 9, "bubble gluings fold back");
    assert_eq!(chart.identifications.len() - reversed, 6, "crossing gluings pass straight");

    assert_eq!(chart.classes.len(), 20);
    assert!(chart.classes.iter().all(|c| !c.open), "finite chart resolves every class");

    let marked: Vec<_> = chart.classes.iter().filter(|c| c.marked_orbit.is_some()).collect();
    assert_eq!(marked.len(), 5, "one pinch class per junction");
    for c in &marked {
        assert_eq!(c.marked_orbit.as_deref(), Some("m"));
        assert_eq!(c.prongs, 1);
        assert!(!c.boundary, "marked pinches are interior points");
    }

    let count = |prongs: usize, boundary: bool| {
        chart
            .classes
            .iter()
            .filter(|c| c.marked_orbit.is_none() && c.prongs == prongs && c.boundary == boundary)
            .count()
    };
    assert_eq!(count(1, true), 5, "one crease per junction on the rim");
    assert_eq!(count(2, true), 3, "rim corners absorbed into the point at infinity");
    assert_eq!(count(2, false), 7, "regular interior corners");

    assert_eq!(chart.infinity_prongs, vec![3]);

    let kinds: Vec<(&str, usize, usize, bool)> = chart
        .singularities
        .iter()
        .map(|s| (s.kind.as_str(), s.k, s.count, s.open))
        .collect();
    assert!(kinds.contains(&("marked", 1, 5, false)), "marked orbit row: {kinds:?}");
    assert!(kinds.contains(&("infinity", 3, 1, false)), "infinity row: {kinds:?}");
    let bigon_rows = kinds.iter().filter(|&&k| k == ("gon", 2, 0, true)).count();
    assert_eq!(bigon_rows, 3, "three semi-infinite bigon chains: {kinds:?}");

    let report = singularity_check(&chart, 0);
    assert!(report.finite);
    assert_eq!(report.open_classes, 0);
    assert_eq!(report.expected, 4);
    assert_eq!(report.closed_balance, 4);
    assert_eq!(report.balance, Some(4));
    assert_eq!(report.pass, Some(true));

    assert!(chart.boundary_polygon.is_empty(), "no free boundary remains");
    assert!(chart.infinity_ladder.is_empty(), "no moduli march to infinity");
    assert_eq!(chart.infinity_residual, 0.0);

    let accum: Vec<(&str, &AccumulationKind)> = chart
        .accumulation_points
        .iter()
        .map(|a| (a.label.as_str(), &a.kind))
        .collect();
    assert_eq!(accum, vec![("m", &AccumulationKind::MarkedOrbit)]);

    // The bubble ladder toward the marked orbit: outermost weights of the
    // four nests, in closed form, strictly shrinking.
    let y = &perron.y;
    let lam = perron.lambda;
    assert_eq!(chart.bubble_ladders.len(), 1);
    let ladder = &chart.bubble_ladders["m"];
    let expected = [
        y[0] / lam,
        y[2] / lam.powi(2),
        y[0] / lam.powi(2),
        y[3] / (2.0 * lam.powi(4)),
    ];
    assert_eq!(ladder.len(), expected.len());
    for (got, want) in ladder.iter().zip(expected) {
        assert!((got - want).abs() <= 1e-9, "ladder rung {got} vs {want}");
    }
    assert!(ladder.windows(2).all(|p| p[0] > p[1]), "ladder decreases: {ladder:?}");
}
