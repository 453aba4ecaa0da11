//! The flat rectangle chart of the induced surface map.
//!
//! Each real edge becomes a Euclidean rectangle of width `x_i` (left Perron
//! vector) and height `y_i` (right Perron vector); each chord becomes an
//! identification between two vertical-side intervals of length equal to
//! its weight.  Collapsing the junction disks onto these seams produces a
//! flat surface whose cone points are recovered combinatorially as
//! equivalence classes of side endpoints, and whose accumulation points
//! admit explicit annulus sequences with length-area modulus lower bounds.

mod build;
mod modulus;
mod render;

pub use build::{
    build_chart, singularity_check, AccumulationKind, AccumulationPoint, BoundarySegment, Chart,
    Identification, PointClass, Rectangle, SideRef, Singularity, SingularityKind,
    SingularityReport,
};
pub use modulus::{
    annulus_modulus_lower_bound, puncture_test, AnnulusPiece, AnnulusSpec, PunctureCertificate,
    Verdict,
};
pub use render::{render_chart, RenderFormat};

use thiserror::Error;

use crate::track::TrackError;

/// Errors from chart construction, rendering and the modulus certificates.
#[derive(Debug, Error)]
pub enum ChartError {
    /// The weights do not satisfy the branch sums at some gate.
    #[error("switch residual {residual} exceeds allowance {allowance}; weights do not close")]
    SwitchFailure { residual: f64, allowance: f64 },
    /// An annulus needs at least one piece.
    #[error("annulus region has no pieces")]
    EmptyRegion,
    /// Length-area bounds need positive area.
    #[error("annulus region has zero area")]
    ZeroArea,
    /// The requested point is not an accumulation point of the chart.
    #[error("'{label}' is not an accumulation point of the chart")]
    NotAccumulation { label: String },
    /// Divergence verdicts need at least three annuli.
    #[error("only {count} annuli are materialized; at least 3 are needed")]
    InsufficientAnnuli { count: usize },
    /// Unknown render format name.
    #[error("unsupported render format '{format}'")]
    UnsupportedFormat { format: String },
    #[error(transparent)]
    Track(#[from] TrackError),
}
