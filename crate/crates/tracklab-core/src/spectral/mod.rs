//! Transition matrices, Perron–Frobenius data, entropy estimators, and the
//! symbolic natural-extension utilities of the quotient graph map.

mod bowen;
mod matrix;
mod natext;
mod perron;

pub use bowen::bowen_entropy;
pub use matrix::{classify_matrix, transition_matrix, MatrixClass, NonnegIntMatrix};
pub use natext::{backward_itineraries, shift, GraphPoint, Itinerary, PlModel};
pub use perron::{certify_integer_eigenvalue, entropy, perron_eigen, PerronData};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("matrix is reducible; Perron data requires irreducibility")]
    Reducible,
    #[error("power iteration did not converge within {cap} iterations")]
    NonConvergence { cap: u64 },
    #[error("separation scale must be positive (got {eps})")]
    BadEpsilon { eps: f64 },
    #[error("iterate count {n} exceeds the supported cap of {cap}")]
    ResourceCap { n: u64, cap: u64 },
    #[error("point lies outside the graph: {detail}")]
    PointOffGraph { detail: String },
}
