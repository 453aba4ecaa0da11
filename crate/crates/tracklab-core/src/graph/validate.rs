//! Semantic validation of a parsed thick graph map system.

use std::collections::BTreeMap;
use std::fmt;

use super::faces::{euler_characteristic, face_orbits};
use super::system::{GateIdx, JunctionIdx, ThickMapSystem};

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// A single validation finding.
#[derive(Debug, Clone)]
pub struct Finding {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub location: String,
}

/// The outcome of validation: findings are data, and the system is valid
/// exactly when no finding carries error severity.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings
            .iter()
            .all(|f| f.severity != Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    fn push(&mut self, severity: Severity, code: &'static str, message: String, location: String) {
        self.findings.push(Finding {
            severity,
            code,
            message,
            location,
        });
    }
}

/// Check the semantic conditions a Markov thick graph map must satisfy:
/// non-degenerate connected edge images, continuity with the junction image
/// map, surjectivity onto edges, the Euler/face count of the declared
/// surface, marked points on attracting periodic junction orbits, and
/// junction pictures consistent with the derived depth-1 passages.
pub fn validate_system(sys: &ThickMapSystem) -> ValidationReport {
    let g = &sys.graph;
    let mut report = ValidationReport::default();

    // Non-degenerate edge images.
    for (i, path) in sys.edge_image.iter().enumerate() {
        if path.is_empty() {
            report.push(
                Severity::Error,
                "degenerate-image",
                "edge image is an empty path (edge collapses to a vertex)".into(),
                format!("edge `{}`", g.strips[i].name),
            );
        }
    }
    if !report.is_valid() {
        // Path-based checks below assume non-empty images.
        return report;
    }

    // Edge paths connect: consecutive steps share a junction.
    for (i, path) in sys.edge_image.iter().enumerate() {
        for w in 0..path.steps.len().saturating_sub(1) {
            let arrive = g.step_terminal_junction(path.steps[w]);
            let depart = g.step_initial_junction(path.steps[w + 1]);
            if arrive != depart {
                report.push(
                    Severity::Error,
                    "path-disconnected",
                    format!(
                        "image path jumps from junction `{}` to `{}` between steps {} and {}",
                        g.junction(arrive).name,
                        g.junction(depart).name,
                        w,
                        w + 1
                    ),
                    format!("edge `{}`", g.strips[i].name),
                );
            }
        }
    }

    // Continuity: path endpoints match junction images of the edge endpoints.
    for (i, path) in sys.edge_image.iter().enumerate() {
        let strip = &g.strips[i];
        let from = [
            g.gate(strip.ends[0]).junction,
            g.gate(strip.ends[1]).junction,
        ];
        let got = [
            g.step_initial_junction(path.steps[0]),
            g.step_terminal_junction(*path.steps.last().unwrap()),
        ];
        for k in 0..2 {
            let expect = sys.junction_image[from[k].0];
            if got[k] != expect {
                report.push(
                    Severity::Error,
                    "continuity",
                    format!(
                        "end {} should land in junction `{}` (image of `{}`) but the path {} `{}`",
                        k,
                        g.junction(expect).name,
                        g.junction(from[k]).name,
                        if k == 0 { "starts at" } else { "ends at" },
                        g.junction(got[k]).name,
                    ),
                    format!("edge `{}`", g.strips[i].name),
                );
            }
        }
    }

    // Surjectivity onto edges.
    let mut covered = vec![false; g.strips.len()];
    for path in &sys.edge_image {
        for st in &path.steps {
            covered[st.strip.0] = true;
        }
    }
    for (i, c) in covered.iter().enumerate() {
        if !c {
            report.push(
                Severity::Error,
                "not-surjective",
                "edge is traversed by no edge image".into(),
                format!("edge `{}`", g.strips[i].name),
            );
        }
    }

    // Surface consistency: Euler characteristic against the declared genus,
    // and the once-punctured face count.
    let chi = euler_characteristic(g);
    let expected = 2 - 2 * g.genus as i64;
    if chi != expected {
        report.push(
            Severity::Error,
            "euler-mismatch",
            format!(
                "ribbon structure gives Euler characteristic {chi}, but genus {} requires {expected}",
                g.genus
            ),
            "surface".into(),
        );
    }
    let faces = face_orbits(g).len();
    if faces > 1 {
        report.push(
            Severity::Warning,
            "multi-puncture",
            format!(
                "thick graph complement has {faces} components; computations assume the once-punctured case"
            ),
            "surface".into(),
        );
    }

    // Marked points on attracting periodic junction orbits.
    let mut orbit_period: BTreeMap<&str, u32> = BTreeMap::new();
    for o in &sys.orbits {
        orbit_period.insert(o.label.as_str(), o.period);
    }
    let mut orbit_members: BTreeMap<&str, Vec<JunctionIdx>> = BTreeMap::new();
    for (i, j) in g.junctions.iter().enumerate() {
        if let Some(m) = &j.marked {
            orbit_members
                .entry(m.orbit.as_str())
                .or_default()
                .push(JunctionIdx(i));
        }
    }
    for (label, members) in &orbit_members {
        let Some(&period) = orbit_period.get(label) else {
            report.push(
                Severity::Error,
                "undeclared-orbit",
                format!("marked points reference orbit `{label}` which is not declared"),
                "map.orbits".into(),
            );
            continue;
        };
        if members.len() != period as usize {
            report.push(
                Severity::Error,
                "orbit-size",
                format!(
                    "orbit `{label}` declares period {period} but marks {} junctions",
                    members.len()
                ),
                "map.orbits".into(),
            );
            continue;
        }
        // The members must form a single cycle of the declared length under
        // the junction image map.
        let start = members[0];
        let mut cur = start;
        let mut steps = 0u32;
        loop {
            cur = sys.junction_image[cur.0];
            steps += 1;
            if !members.contains(&cur) {
                report.push(
                    Severity::Error,
                    "orbit-escape",
                    format!(
                        "junction `{}` of orbit `{label}` maps to unmarked junction `{}`",
                        g.junction(start).name,
                        g.junction(cur).name
                    ),
                    "map.orbits".into(),
                );
                break;
            }
            if cur == start {
                if steps != period {
                    report.push(
                        Severity::Error,
                        "orbit-period",
                        format!(
                            "orbit `{label}` declares period {period} but closes after {steps}"
                        ),
                        "map.orbits".into(),
                    );
                }
                break;
            }
            if steps > period {
                report.push(
                    Severity::Error,
                    "orbit-period",
                    format!("orbit `{label}` does not close within its declared period"),
                    "map.orbits".into(),
                );
                break;
            }
        }
    }
    if orbit_members.len() > 1 {
        let desc: Vec<String> = orbit_members
            .keys()
            .map(|label| format!("`{label}` (period {})", orbit_period.get(label).copied().unwrap_or(0)))
            .collect();
        report.push(
            Severity::Warning,
            "multiple-marked-orbits",
            format!("{} marked orbits: {}", orbit_members.len(), desc.join(", ")),
            "map.orbits".into(),
        );
    }

    // Junction pictures must list exactly the derived depth-1 passages, with
    // rank a total order on each unordered same-gate-pair family.
    let mut derived: Vec<Vec<(GateIdx, GateIdx)>> = vec![Vec::new(); g.junctions.len()];
    for path in &sys.edge_image {
        for w in 0..path.steps.len().saturating_sub(1) {
            let entry = g.step_terminal_gate(path.steps[w]);
            let exit = g.step_initial_gate(path.steps[w + 1]);
            let j = g.gate(entry).junction;
            derived[j.0].push((entry, exit));
        }
    }
    for (ji, decls) in sys.pictures.iter().enumerate() {
        let name = &g.junctions[ji].name;
        let mut want: Vec<(GateIdx, GateIdx)> = derived[ji].clone();
        let mut have: Vec<(GateIdx, GateIdx)> = decls.iter().map(|s| (s.entry, s.exit)).collect();
        // Passages are undirected as strands: normalize gate pairs.
        let norm = |p: &mut Vec<(GateIdx, GateIdx)>| {
            for q in p.iter_mut() {
                if q.1 < q.0 {
                    *q = (q.1, q.0);
                }
            }
            p.sort();
        };
        norm(&mut want);
        norm(&mut have);
        if want != have {
            report.push(
                Severity::Error,
                "picture-mismatch",
                format!(
                    "declared strands do not match the {} passages derived from the edge images",
                    want.len()
                ),
                format!("junction_pictures[`{name}`]"),
            );
            continue;
        }
        // Rank totality per unordered pair family.
        let mut families: BTreeMap<(GateIdx, GateIdx), Vec<u32>> = BTreeMap::new();
        for s in decls {
            let key = if s.exit < s.entry {
                (s.exit, s.entry)
            } else {
                (s.entry, s.exit)
            };
            families.entry(key).or_default().push(s.rank);
        }
        for (pair, mut ranks) in families {
            ranks.sort();
            let ok = ranks.iter().enumerate().all(|(i, &r)| r == i as u32);
            if !ok {
                report.push(
                    Severity::Error,
                    "rank-totality",
                    format!(
                        "ranks for the strand family ({}, {}) must be exactly 0..{}",
                        g.gate(pair.0).name,
                        g.gate(pair.1).name,
                        ranks.len()
                    ),
                    format!("junction_pictures[`{name}`]"),
                );
            }
        }
    }
    // Junctions with passages but no declared picture.
    for (ji, passages) in derived.iter().enumerate() {
        if !passages.is_empty() && sys.pictures[ji].is_empty() {
            report.push(
                Severity::Error,
                "picture-missing",
                format!("{} passages derived but no junction picture declared", passages.len()),
                format!("junction_pictures[`{}`]", g.junctions[ji].name),
            );
        }
    }

    report
}
