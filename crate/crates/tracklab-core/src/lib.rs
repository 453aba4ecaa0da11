//! Computational toolkit for Markov thick graph maps.
//!
//! A *thick graph* is a compact orientable subsurface decomposed into
//! junctions (disks) and strips (bands); collapsing strips to arcs and
//! junctions to points yields an ordinary graph.  A *thick graph map* is an
//! orientation-preserving homeomorphism carrying the thick graph into its own
//! interior, inducing an endomorphism of the quotient graph.  When the map is
//! affine on strips with uniform expansion (the Markov case), it determines a
//! generalized pseudo-Anosov homeomorphism of the closed surface.
//!
//! The crate is organised along the pipeline that recovers that pseudo-Anosov
//! structure from the combinatorial input:
//!
//! * [`graph`] — data model, parsing, validation, and the derived planar
//!   arrangement of depth-1 image strands inside each junction.
//! * [`spectral`] — transition matrices, Perron–Frobenius eigendata, entropy
//!   (spectral and Bowen), and symbolic backward-itinerary utilities.
//! * [`track`] — invariant generalized train tracks: push-forward, infinite
//!   track truncation with orbit structure, the n-gon census, and 1-pronged
//!   singularity orbit classification.
//! * [`measure`] — completion of the Perron eigenvector over infinitesimal
//!   edges with a rigorous tail bound, and switch-condition verification.
//! * [`chart`] — the rectangle chart of the induced generalized pseudo-Anosov
//!   map, its singularity census, SVG/JSON rendering, and puncture
//!   certificates via length–area modulus bounds.

pub mod chart;
pub mod graph;
pub mod measure;
pub mod spectral;
pub mod track;
