//! JSON input schema: parsing into [`ThickMapSystem`] and canonical
//! serialization back out.
//!
//! The document layout is fixed: top-level keys `surface`, `junctions`,
//! `edges`, `map`.  Unknown keys are rejected everywhere.  The serializer
//! emits a canonical ordering (junctions and edges sorted by id, map tables
//! sorted by key) so that parse ∘ serialize is the identity on canonicalized
//! documents, byte for byte.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::path::{EdgePath, EdgeStep};
use super::system::{
    Gate, GateIdx, Junction, JunctionIdx, MarkedPoint, OrbitDecl, RibbonGraph, StrandDecl, Strip,
    StripIdx, ThickMapSystem,
};

/// Errors produced while reading an input document.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown {kind} `{id}` referenced by {context}")]
    DanglingReference {
        kind: &'static str,
        id: String,
        context: String,
    },
    #[error("gate `{id}` {problem}")]
    GateStructure { id: String, problem: String },
    #[error("edge `{id}` has sign {sign}; expected 1 or -1")]
    BadSign { id: String, sign: i64 },
    #[error("junction `{junction}` marked point references gate `{gate}` not on its boundary")]
    MarkedGate { junction: String, gate: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    surface: RawSurface,
    junctions: Vec<RawJunction>,
    edges: Vec<RawEdge>,
    map: RawMap,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    genus: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJunction {
    id: String,
    boundary: Vec<String>,
    marked: Option<RawMarked>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarked {
    attach_after: String,
    orbit: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: String,
    ends: [RawEnd; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnd {
    junction: String,
    gate: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    junction_image: BTreeMap<String, String>,
    edge_image: BTreeMap<String, Vec<RawStep>>,
    junction_pictures: BTreeMap<String, Vec<RawStrand>>,
    orbits: Vec<RawOrbit>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    edge: String,
    sign: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrand {
    entry: String,
    exit: String,
    rank: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrbit {
    label: String,
    period: u32,
}

/// Parse a JSON document into a fully indexed system.
///
/// Structural integrity (id uniqueness, reference resolution, each gate
/// appearing exactly once on a boundary and exactly once as an edge end) is
/// enforced here; semantic conditions (continuity, surjectivity, orbit
/// periodicity, picture consistency) are the business of
/// [`validate_system`](super::validate_system).
pub fn parse_system(text: &str) -> Result<ThickMapSystem, ParseError> {
    let raw: RawDoc = serde_json::from_str(text)?;
    build_system(raw)
}

fn build_system(raw: RawDoc) -> Result<ThickMapSystem, ParseError> {
    // Junction ids.
    let mut junction_ix: HashMap<String, JunctionIdx> = HashMap::new();
    for (i, j) in raw.junctions.iter().enumerate() {
        if junction_ix.insert(j.id.clone(), JunctionIdx(i)).is_some() {
            return Err(ParseError::DuplicateId {
                kind: "junction",
                id: j.id.clone(),
            });
        }
    }
    // Gate ids, from boundaries.
    let mut gate_ix: HashMap<String, GateIdx> = HashMap::new();
    let mut gates: Vec<Gate> = Vec::new();
    for (ji, j) in raw.junctions.iter().enumerate() {
        for (pos, gname) in j.boundary.iter().enumerate() {
            if gate_ix.contains_key(gname) {
                return Err(ParseError::DuplicateId {
                    kind: "gate",
                    id: gname.clone(),
                });
            }
            gate_ix.insert(gname.clone(), GateIdx(gates.len()));
            gates.push(Gate {
                name: gname.clone(),
                junction: JunctionIdx(ji),
                boundary_pos: pos,
                // Filled in below once edges are read.
                strip: StripIdx(usize::MAX),
                end: 0,
            });
        }
    }
    // Edge ids and gate/end assignment.
    let mut strip_ix: HashMap<String, StripIdx> = HashMap::new();
    let mut strips: Vec<Strip> = Vec::new();
    for (ei, e) in raw.edges.iter().enumerate() {
        if strip_ix.insert(e.id.clone(), StripIdx(ei)).is_some() {
            return Err(ParseError::DuplicateId {
                kind: "edge",
                id: e.id.clone(),
            });
        }
        let mut ends = [GateIdx(0), GateIdx(0)];
        for (k, end) in e.ends.iter().enumerate() {
            let &jx = junction_ix.get(&end.junction).ok_or_else(|| {
                ParseError::DanglingReference {
                    kind: "junction",
                    id: end.junction.clone(),
                    context: format!("edge `{}` end {}", e.id, k),
                }
            })?;
            let &gx = gate_ix
                .get(&end.gate)
                .ok_or_else(|| ParseError::DanglingReference {
                    kind: "gate",
                    id: end.gate.clone(),
                    context: format!("edge `{}` end {}", e.id, k),
                })?;
            let gate = &mut gates[gx.0];
            if gate.junction != jx {
                return Err(ParseError::GateStructure {
                    id: end.gate.clone(),
                    problem: format!(
                        "listed on junction `{}` but edge `{}` end {} places it on `{}`",
                        raw.junctions[gate.junction.0].id, e.id, k, end.junction
                    ),
                });
            }
            if gate.strip != StripIdx(usize::MAX) {
                return Err(ParseError::GateStructure {
                    id: end.gate.clone(),
                    problem: "used by more than one edge end".into(),
                });
            }
            gate.strip = StripIdx(ei);
            gate.end = k as u8;
            ends[k] = gx;
        }
        strips.push(Strip {
            name: e.id.clone(),
            ends,
        });
    }
    // Every boundary gate must host exactly one edge end.
    for g in &gates {
        if g.strip == StripIdx(usize::MAX) {
            return Err(ParseError::GateStructure {
                id: g.name.clone(),
                problem: "appears on a junction boundary but on no edge end".into(),
            });
        }
    }
    // Junctions with marked points.
    let mut junctions: Vec<Junction> = Vec::new();
    for j in &raw.junctions {
        let marked = match &j.marked {
            None => None,
            Some(m) => {
                let &gx =
                    gate_ix
                        .get(&m.attach_after)
                        .ok_or_else(|| ParseError::DanglingReference {
                            kind: "gate",
                            id: m.attach_after.clone(),
                            context: format!("junction `{}` marked point", j.id),
                        })?;
                if gates[gx.0].junction != junction_ix[&j.id] {
                    return Err(ParseError::MarkedGate {
                        junction: j.id.clone(),
                        gate: m.attach_after.clone(),
                    });
                }
                Some(MarkedPoint {
                    attach_after: gx,
                    orbit: m.orbit.clone(),
                })
            }
        };
        junctions.push(Junction {
            name: j.id.clone(),
            boundary: j.boundary.iter().map(|g| gate_ix[g]).collect(),
            marked,
        });
    }
    let graph = RibbonGraph {
        junctions,
        strips,
        gates,
        genus: raw.surface.genus,
    };

    // Dynamics: junction images.
    let mut junction_image = vec![JunctionIdx(usize::MAX); graph.junctions.len()];
    for (from, to) in &raw.map.junction_image {
        let &fx = junction_ix
            .get(from)
            .ok_or_else(|| ParseError::DanglingReference {
                kind: "junction",
                id: from.clone(),
                context: "junction_image key".into(),
            })?;
        let &tx = junction_ix
            .get(to)
            .ok_or_else(|| ParseError::DanglingReference {
                kind: "junction",
                id: to.clone(),
                context: format!("junction_image[`{from}`]"),
            })?;
        junction_image[fx.0] = tx;
    }
    for (i, &im) in junction_image.iter().enumerate() {
        if im == JunctionIdx(usize::MAX) {
            return Err(ParseError::DanglingReference {
                kind: "junction_image entry",
                id: graph.junctions[i].name.clone(),
                context: "map.junction_image (missing key)".into(),
            });
        }
    }

    // Edge images.
    let mut edge_image = vec![EdgePath { steps: Vec::new() }; graph.strips.len()];
    for (eid, steps) in &raw.map.edge_image {
        let &ex = strip_ix
            .get(eid)
            .ok_or_else(|| ParseError::DanglingReference {
                kind: "edge",
                id: eid.clone(),
                context: "edge_image key".into(),
            })?;
        let mut path = Vec::with_capacity(steps.len());
        for st in steps {
            let &sx = strip_ix
                .get(&st.edge)
                .ok_or_else(|| ParseError::DanglingReference {
                    kind: "edge",
                    id: st.edge.clone(),
                    context: format!("edge_image[`{eid}`]"),
                })?;
            let forward = match st.sign {
                1 => true,
                -1 => false,
                other => {
                    return Err(ParseError::BadSign {
                        id: eid.clone(),
                        sign: other,
                    })
                }
            };
            path.push(EdgeStep { strip: sx, forward });
        }
        edge_image[ex.0] = EdgePath { steps: path };
    }
    for (i, p) in edge_image.iter().enumerate() {
        if p.is_empty() && !raw.map.edge_image.contains_key(&graph.strips[i].name) {
            return Err(ParseError::DanglingReference {
                kind: "edge_image entry",
                id: graph.strips[i].name.clone(),
                context: "map.edge_image (missing key)".into(),
            });
        }
    }

    // Junction pictures.
    let mut pictures: Vec<Vec<StrandDecl>> = vec![Vec::new(); graph.junctions.len()];
    for (jid, strands) in &raw.map.junction_pictures {
        let &jx = junction_ix
            .get(jid)
            .ok_or_else(|| ParseError::DanglingReference {
                kind: "junction",
                id: jid.clone(),
                context: "junction_pictures key".into(),
            })?;
        let mut decls = Vec::with_capacity(strands.len());
        for s in strands {
            let resolve = |gname: &String| -> Result<GateIdx, ParseError> {
                let &gx = gate_ix
                    .get(gname)
                    .ok_or_else(|| ParseError::DanglingReference {
                        kind: "gate",
                        id: gname.clone(),
                        context: format!("junction_pictures[`{jid}`]"),
                    })?;
                if graph.gates[gx.0].junction != jx {
                    return Err(ParseError::GateStructure {
                        id: gname.clone(),
                        problem: format!("referenced by picture of junction `{jid}` but belongs elsewhere"),
                    });
                }
                Ok(gx)
            };
            decls.push(StrandDecl {
                entry: resolve(&s.entry)?,
                exit: resolve(&s.exit)?,
                rank: s.rank,
            });
        }
        pictures[jx.0] = decls;
    }

    let orbits = raw
        .map
        .orbits
        .iter()
        .map(|o| OrbitDecl {
            label: o.label.clone(),
            period: o.period,
        })
        .collect();

    Ok(ThickMapSystem {
        graph,
        junction_image,
        edge_image,
        pictures,
        orbits,
    })
}

/// Serialize a system to the canonical JSON form: junctions and edges sorted
/// by id, map tables sorted by key, two-space indentation, trailing newline.
pub fn serialize_system(sys: &ThickMapSystem) -> String {
    let g = &sys.graph;
    let mut junctions: Vec<RawJunction> = g
        .junctions
        .iter()
        .map(|j| RawJunction {
            id: j.name.clone(),
            boundary: j.boundary.iter().map(|&gx| g.gate(gx).name.clone()).collect(),
            marked: j.marked.as_ref().map(|m| RawMarked {
                attach_after: g.gate(m.attach_after).name.clone(),
                orbit: m.orbit.clone(),
            }),
        })
        .collect();
    junctions.sort_by(|a, b| a.id.cmp(&b.id));
    let mut edges: Vec<RawEdge> = g
        .strips
        .iter()
        .map(|s| RawEdge {
            id: s.name.clone(),
            ends: [0, 1].map(|k| {
                let gate = g.gate(s.ends[k]);
                RawEnd {
                    junction: g.junction(gate.junction).name.clone(),
                    gate: gate.name.clone(),
                }
            }),
        })
        .collect();
    edges.sort_by(|a, b| a.id.cmp(&b.id));
    let junction_image: BTreeMap<String, String> = g
        .junctions
        .iter()
        .enumerate()
        .map(|(i, j)| {
            (
                j.name.clone(),
                g.junction(sys.junction_image[i]).name.clone(),
            )
        })
        .collect();
    let edge_image: BTreeMap<String, Vec<RawStep>> = g
        .strips
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (
                s.name.clone(),
                sys.edge_image[i]
                    .steps
                    .iter()
                    .map(|st| RawStep {
                        edge: g.strip(st.strip).name.clone(),
                        sign: if st.forward { 1 } else { -1 },
                    })
                    .collect(),
            )
        })
        .collect();
    let junction_pictures: BTreeMap<String, Vec<RawStrand>> = g
        .junctions
        .iter()
        .enumerate()
        .filter(|(i, _)| !sys.pictures[*i].is_empty())
        .map(|(i, j)| {
            (
                j.name.clone(),
                sys.pictures[i]
                    .iter()
                    .map(|s| RawStrand {
                        entry: g.gate(s.entry).name.clone(),
                        exit: g.gate(s.exit).name.clone(),
                        rank: s.rank,
                    })
                    .collect(),
            )
        })
        .collect();
    let mut orbits: Vec<RawOrbit> = sys
        .orbits
        .iter()
        .map(|o| RawOrbit {
            label: o.label.clone(),
            period: o.period,
        })
        .collect();
    orbits.sort_by(|a, b| a.label.cmp(&b.label));
    let doc = RawDoc {
        surface: RawSurface { genus: g.genus },
        junctions,
        edges,
        map: RawMap {
            junction_image,
            edge_image,
            junction_pictures,
            orbits,
        },
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("serialization cannot fail");
    out.push('\n');
    out
}
