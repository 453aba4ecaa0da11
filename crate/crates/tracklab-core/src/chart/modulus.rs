//! Annulus modulus lower bounds and puncture divergence certificates.
//!
//! An annulus assembled from flat pieces has modulus at least
//! `crossing² / area`, where `crossing` is the shortest transverse crossing
//! of any piece and `area` the total area: every core-separating curve must
//! cross some piece, so the extremal-length estimate with the constant
//! candidate metric gives the bound.  Nesting disjoint annuli around a
//! candidate puncture and summing their moduli then certifies how the total
//! modulus grows — a divergent sum pins the point as a genuine puncture
//! (or cone point of angle ≤ π) rather than a removable regular point.
//!
//! Two fixed constructions are used, one per accumulation kind:
//!
//! * **infinity** — the interval ladder climbing toward the widest residual
//!   gives nested "radii" `R_n` (suffix sums of the rungs plus the
//!   residual); annulus `n` is budgeted as three quarter-annuli and `2n`
//!   half-annuli between `R_{n+1}` and `R_n`, matching how the boundary
//!   polygon wraps more rectangles at each level.
//! * **marked orbit** — consecutive nested chords of widths `y_n > y_{n+1}`
//!   leave a collar of thickness `y_n − y_{n+1}` around a loop of length
//!   `2·y_n`, budgeted as a single flat ring.

use std::f64::consts::PI;

use serde_json::{json, Value};

use super::{AccumulationKind, Chart, ChartError};

/// A flat piece contributing to an annulus.
#[derive(Debug, Clone, Copy)]
pub enum AnnulusPiece {
    /// A flat ring segment of length `along`, crossed over `across`.
    Rect { along: f64, across: f64 },
    /// Quarter of a round annulus between the two radii.
    QuarterAnnulus { inner: f64, outer: f64 },
    /// Half of a round annulus between the two radii.
    HalfAnnulus { inner: f64, outer: f64 },
    /// A full round annulus between the two radii.
    FullAnnulus { inner: f64, outer: f64 },
}

impl AnnulusPiece {
    /// Length of the shortest transverse crossing of the piece.
    pub fn crossing(&self) -> f64 {
        match *self {
            AnnulusPiece::Rect { across, .. } => across,
            AnnulusPiece::QuarterAnnulus { inner, outer }
            | AnnulusPiece::HalfAnnulus { inner, outer }
            | AnnulusPiece::FullAnnulus { inner, outer } => outer - inner,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            AnnulusPiece::Rect { along, across } => along * across,
            AnnulusPiece::QuarterAnnulus { inner, outer } => {
                PI * (outer * outer - inner * inner) / 4.0
            }
            AnnulusPiece::HalfAnnulus { inner, outer } => {
                PI * (outer * outer - inner * inner) / 2.0
            }
            AnnulusPiece::FullAnnulus { inner, outer } => PI * (outer * outer - inner * inner),
        }
    }
}

/// An annulus described as a disjoint union of flat pieces.
#[derive(Debug, Clone, Default)]
pub struct AnnulusSpec {
    pub pieces: Vec<AnnulusPiece>,
}

/// Lower bound `min crossing² / total area` for the modulus of the annulus.
///
/// Errors with [`ChartError::EmptyRegion`] when no pieces are given and with
/// [`ChartError::ZeroArea`] when any piece is degenerate.
pub fn annulus_modulus_lower_bound(spec: &AnnulusSpec) -> Result<f64, ChartError> {
    if spec.pieces.is_empty() {
        return Err(ChartError::EmptyRegion);
    }
    let mut min_crossing = f64::INFINITY;
    let mut area = 0.0f64;
    for p in &spec.pieces {
        let c = p.crossing();
        let a = p.area();
        if !(c > 0.0) || !(a > 0.0) || !c.is_finite() || !a.is_finite() {
            return Err(ChartError::ZeroArea);
        }
        min_crossing = min_crossing.min(c);
        area += a;
    }
    Ok(min_crossing * min_crossing / area)
}

/// How the modulus partial sums around a candidate puncture diverge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `1/bound_n` grows affinely, so `S_N ≥ c·ln N`.
    DivergesLikeLog,
    /// Bounds stay of one size, so `S_N ≥ c·N`.
    DivergesLinearly,
    /// Neither pattern was matched; nothing is certified.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::DivergesLikeLog => "diverges-like-log",
            Verdict::DivergesLinearly => "diverges-linearly",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of [`puncture_test`]: nested annulus bounds and the divergence
/// verdict over them.
#[derive(Debug, Clone)]
pub struct PunctureCertificate {
    pub label: String,
    pub kind: AccumulationKind,
    /// Modulus lower bound of the `n`-th nested annulus, `n = 1, 2, …`.
    pub bounds: Vec<f64>,
    /// Partial sums `S_n` of the bounds.
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
    /// Least-squares fit `1/bound ≈ a + b·n` with its max relative error,
    /// present when the log pattern was tried.
    pub fit: Option<(f64, f64, f64)>,
    /// Constant `c` of the certified minorant (`S_N ≥ c·N` for linear
    /// divergence, `S_N ≥ c·ln N` for logarithmic).
    pub minorant: Option<f64>,
}

impl PunctureCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "label": self.label,
            "kind": self.kind.as_str(),
            "annuli": self.bounds.len(),
            "bounds": self.bounds,
            "partial_sums": self.partial_sums,
            "verdict": self.verdict.as_str(),
            "fit": self.fit.map(|(a, b, err)| json!({
                "a": a,
                "b": b,
                "max_rel_err": err,
            })),
            "minorant": self.minorant,
        })
    }
}

/// Maximum relative error tolerated by the affine `1/bound` fit.
const FIT_TOLERANCE: f64 = 0.25;
/// Bounds whose first/last ratio stays above this are "of one size".
const FLAT_RATIO: f64 = 0.5;

/// Build nested annuli around the accumulation point `label` and certify how
/// their modulus sum diverges.
///
/// At most `n_max` annuli are assembled (fewer when the chart's ladder runs
/// out); fewer than three is an [`ChartError::InsufficientAnnuli`] error, and
/// an unknown label is [`ChartError::NotAccumulation`].
pub fn puncture_test(
    chart: &Chart,
    label: &str,
    n_max: usize,
) -> Result<PunctureCertificate, ChartError> {
    let point = chart
        .accumulation_points
        .iter()
        .find(|a| a.label == label)
        .ok_or_else(|| ChartError::NotAccumulation { label: label.to_string() })?;

    let specs: Vec<AnnulusSpec> = match point.kind {
        AccumulationKind::Infinity => {
            let rungs = &chart.infinity_ladder;
            // radii[n] = Σ_{k > n} rung_k + residual, outermost at n = 0.
            let mut radii = vec![chart.infinity_residual; rungs.len() + 1];
            for n in (0..rungs.len()).rev() {
                radii[n] = radii[n + 1] + rungs[n];
            }
            let count = rungs.len().saturating_sub(1).min(n_max);
            (1..=count)
                .map(|n| {
                    let (inner, outer) = (radii[n + 1], radii[n]);
                    let mut pieces =
                        vec![AnnulusPiece::QuarterAnnulus { inner, outer }; 3];
                    pieces.extend(
                        std::iter::repeat(AnnulusPiece::HalfAnnulus { inner, outer })
                            .take(2 * n),
                    );
                    AnnulusSpec { pieces }
                })
                .collect()
        }
        AccumulationKind::MarkedOrbit => {
            let ladder = chart.bubble_ladders.get(label).cloned().unwrap_or_default();
            let count = ladder.len().saturating_sub(1).min(n_max);
            (1..=count)
                .map(|n| {
                    let (y, y_next) = (ladder[n - 1], ladder[n]);
                    AnnulusSpec {
                        pieces: vec![AnnulusPiece::Rect {
                            along: 2.0 * y,
                            across: y - y_next,
                        }],
                    }
                })
                .collect()
        }
    };
    if specs.len() < 3 {
        return Err(ChartError::InsufficientAnnuli { count: specs.len() });
    }

    let bounds = specs
        .iter()
        .map(annulus_modulus_lower_bound)
        .collect::<Result<Vec<f64>, ChartError>>()?;
    let mut partial_sums = Vec::with_capacity(bounds.len());
    let mut s = 0.0;
    for b in &bounds {
        s += b;
        partial_sums.push(s);
    }

    let first = bounds[0];
    let last = *bounds.last().unwrap();
    let mut fit = None;
    let (verdict, minorant) = if last / first >= FLAT_RATIO {
        let c = bounds.iter().cloned().fold(f64::INFINITY, f64::min);
        (Verdict::DivergesLinearly, Some(c))
    } else {
        let (a, b, err) = fit_affine_inverse(&bounds);
        fit = Some((a, b, err));
        if err <= FIT_TOLERANCE && b > 0.0 {
            let c = partial_sums
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, s)| s / ((i + 1) as f64).ln())
                .fold(f64::INFINITY, f64::min);
            (Verdict::DivergesLikeLog, Some(c))
        } else {
            (Verdict::Inconclusive, None)
        }
    };

    Ok(PunctureCertificate {
        label: label.to_string(),
        kind: point.kind,
        bounds,
        partial_sums,
        verdict,
        fit,
        minorant,
    })
}

/// Least-squares fit `1/bound_n ≈ a + b·n` over `n = 1..=N`, returning
/// `(a, b, max relative error)`.
fn fit_affine_inverse(bounds: &[f64]) -> (f64, f64, f64) {
    let n = bounds.len() as f64;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut sum_xx = 0.0;
    let mut sum_xy = 0.0;
    for (i, &bnd) in bounds.iter().enumerate() {
        let x = (i + 1) as f64;
        let y = 1.0 / bnd;
        sum_x += x;
        sum_y += y;
        sum_xx += x * x;
        sum_xy += x * y;
    }
    let denom = n * sum_xx - sum_x * sum_x;
    let b = (n * sum_xy - sum_x * sum_y) / denom;
    let a = (sum_y - b * sum_x) / n;
    let mut err = 0.0f64;
    for (i, &bnd) in bounds.iter().enumerate() {
        let x = (i + 1) as f64;
        let predicted = a + b * x;
        if predicted <= 0.0 {
            return (a, b, f64::INFINITY);
        }
        err = err.max((1.0 / bnd - predicted).abs() / predicted);
    }
    (a, b, err)
}
