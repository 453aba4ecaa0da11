//! Data model for thick graphs and Markov thick graph maps.
//!
//! The combinatorial core is a [`RibbonGraph`]: junctions carry a cyclic,
//! positively oriented (counterclockwise) list of *gates* — the boundary arcs
//! where strips attach — and each strip joins two gates.  A
//! [`ThickMapSystem`] adds the dynamics: a junction image map, one edge path
//! per strip describing the image of that strip through the graph, the
//! declared depth-1 strand pictures per junction, and the attracting periodic
//! orbits of marked points.
//!
//! Conventions used throughout the crate:
//!
//! * Per-gate linear data is always stored in the gate's *positive boundary
//!   direction*, i.e. the direction induced by the counterclockwise
//!   orientation of the junction boundary.  Orientation-preserving maps then
//!   refine such lists order-preservingly, so no orientation signs are needed
//!   anywhere downstream.
//! * A *gap* `(junction, i)` denotes the free boundary arc that follows the
//!   `i`-th gate of the junction counterclockwise; marked-point rays attach
//!   inside gaps.

mod arrange;
mod critical;
mod faces;
mod nesting;
mod path;
mod schema;
mod system;
mod validate;

pub use arrange::{solve_arrangement, Address, Arrangement, ArrangementError, ItemKey, Passage};
pub(crate) use arrange::{Bound, CirclePoint};
pub use critical::{critical_points, germ_image, CriticalLocus, Germ};
pub use faces::{face_orbits, euler_characteristic, FaceTrace};
pub use nesting::{derive_nesting, NestingError, Turn, TurnId, TurnNesting};
pub use path::{EdgePath, EdgeStep};
pub use schema::{parse_system, serialize_system, ParseError};
pub use system::{
    Gate, GateIdx, Junction, JunctionIdx, MarkedPoint, OrbitDecl, RibbonGraph, Strip, StripIdx,
    StrandDecl, ThickMapSystem,
};
pub use validate::{validate_system, Finding, Severity, ValidationReport};
