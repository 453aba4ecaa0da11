//! Piecewise-linear realization of the quotient graph map and its backward
//! orbit branches.
//!
//! Edges are given the left-eigenvector lengths, which makes the induced
//! graph map linear of constant slope λ on every monotone lap.  Backward
//! itineraries enumerate the finite-depth fibers of the natural extension.

use crate::graph::{StripIdx, ThickMapSystem};

use super::perron::perron_eigen;
use super::matrix::transition_matrix;
use super::SpectralError;

/// Constant-slope metric model of the quotient graph map.
#[derive(Debug, Clone)]
pub struct PlModel {
    pub lengths: Vec<f64>,
    pub lambda: f64,
}

/// A point on the quotient graph: an edge and a coordinate in `[0, 1]`
/// measured from the edge's first endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub strip: StripIdx,
    pub t: f64,
}

/// A finite backward branch `(x₀, …, x_k)` with `f(x_{i+1}) = x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Itinerary {
    pub points: Vec<GraphPoint>,
}

const SNAP: f64 = 1e-9;

impl PlModel {
    pub fn new(sys: &ThickMapSystem) -> Result<PlModel, SpectralError> {
        let m = transition_matrix(sys);
        let data = perron_eigen(&m, 1e-12)?;
        Ok(PlModel {
            lengths: data.x,
            lambda: data.lambda,
        })
    }

    /// Forward image of a point: walk the image path of its edge at constant
    /// slope.
    pub fn forward(&self, sys: &ThickMapSystem, p: GraphPoint) -> GraphPoint {
        let path = &sys.edge_image[p.strip.0];
        let target = p.t * self.lambda * self.lengths[p.strip.0];
        let mut acc = 0.0;
        for (r, step) in path.steps.iter().enumerate() {
            let len = self.lengths[step.strip.0];
            let last = r + 1 == path.steps.len();
            if target <= acc + len + SNAP || last {
                let d = ((target - acc) / len).clamp(0.0, 1.0);
                let t = if step.forward { d } else { 1.0 - d };
                return GraphPoint {
                    strip: step.strip,
                    t,
                };
            }
            acc += len;
        }
        unreachable!("paths are non-empty");
    }

    /// All solutions of `f(y) = q`, one per lap covering `q`, with merges at
    /// shared vertices and folds removed.
    pub fn preimages(&self, sys: &ThickMapSystem, q: GraphPoint) -> Vec<GraphPoint> {
        let mut out: Vec<GraphPoint> = Vec::new();
        for (j, path) in sys.edge_image.iter().enumerate() {
            let mut acc = 0.0;
            for step in &path.steps {
                let len = self.lengths[step.strip.0];
                if step.strip == q.strip {
                    let d = if step.forward { q.t } else { 1.0 - q.t } * len;
                    let t = (acc + d) / (self.lambda * self.lengths[j]);
                    let y = GraphPoint {
                        strip: StripIdx(j),
                        t: t.clamp(0.0, 1.0),
                    };
                    if !out.iter().any(|z| same_point(sys, *z, y)) {
                        out.push(y);
                    }
                }
                acc += len;
            }
        }
        out
    }
}

/// Are two parametrized points the same point of the graph?  Interior points
/// compare within snapping tolerance on the same edge; endpoint points are
/// identified across all edges meeting at their junction.
pub fn same_point(sys: &ThickMapSystem, a: GraphPoint, b: GraphPoint) -> bool {
    let vertex_of = |p: GraphPoint| {
        let ends = sys.graph.strip(p.strip).ends;
        if p.t < SNAP {
            Some(sys.graph.gate(ends[0]).junction)
        } else if p.t > 1.0 - SNAP {
            Some(sys.graph.gate(ends[1]).junction)
        } else {
            None
        }
    };
    match (vertex_of(a), vertex_of(b)) {
        (Some(u), Some(v)) => u == v,
        (None, None) => a.strip == b.strip && (a.t - b.t).abs() < SNAP,
        _ => false,
    }
}

/// Enumerate all depth-`k` backward branches of `x0`.
pub fn backward_itineraries(
    sys: &ThickMapSystem,
    x0: GraphPoint,
    k: usize,
) -> Result<Vec<Itinerary>, SpectralError> {
    if x0.strip.0 >= sys.graph.strips.len() || !(0.0..=1.0).contains(&x0.t) {
        return Err(SpectralError::PointOffGraph {
            detail: format!("edge index {} / coordinate {}", x0.strip.0, x0.t),
        });
    }
    let model = PlModel::new(sys)?;
    let mut branches = vec![Itinerary {
        points: vec![x0],
    }];
    for _ in 0..k {
        let mut next = Vec::new();
        for it in &branches {
            let last = *it.points.last().unwrap();
            for y in model.preimages(sys, last) {
                let mut points = it.points.clone();
                points.push(y);
                next.push(Itinerary { points });
            }
        }
        branches = next;
    }
    Ok(branches)
}

/// One step of the natural-extension shift: prepend `f(x₀)`.
pub fn shift(it: &Itinerary, sys: &ThickMapSystem) -> Result<Itinerary, SpectralError> {
    let model = PlModel::new(sys)?;
    let mut points = Vec::with_capacity(it.points.len() + 1);
    points.push(model.forward(sys, it.points[0]));
    points.extend(it.points.iter().copied());
    Ok(Itinerary { points })
}
