//! Truncated-series completion of the Perron weights and the switch checks.
//!
//! Writing `Y` for the real heights, `B` for the strand rows and `Pi` for
//! the chord map, the chord weights solve `lambda Y' = Pi Y' + B Y`, i.e.
//!
//! ```text
//! Y' = sum_{k >= 0} Pi^k B Y / lambda^(k+1).
//! ```
//!
//! `Pi` only relabels mass along the chord map, so the series is evaluated
//! sparsely: seed every chord with its strand-row mass, then repeatedly
//! transport the masses one chord-map step while damping by `lambda`.  Mass
//! reaching a final-layer chord (one with no chord-map entry) belongs to
//! chords beyond the materialized depth and is dropped; the weights of the
//! materialized chords are unaffected.  The transported mass at step `k`
//! never exceeds `|B| |Y|` (operator 1-norm for `B`, 1-norm for `Y`), so
//! truncating after `K + 1` terms leaves an error of at most
//! `|B| |Y| lambda^-(K+1) / (lambda - 1)` in every entry, and the dropped
//! chords beyond depth `K` carry total foot mass (feet count twice) at most
//! `2 |B| |Y| lambda^-K / (lambda - 1)` on any gate.  The larger gate-level
//! quantity is published as the tail bound, since it also dominates the
//! per-chord error.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::graph::ThickMapSystem;
use crate::spectral::PerronData;
use crate::track::{ChordId, InvariantTrack, TrackBlocks};

use super::MeasureError;

/// Transverse weights of the materialized track.
#[derive(Debug, Clone)]
pub struct WeightAssignment {
    /// Heights of the real edges: the unit 1-norm Perron vector.
    pub real: Vec<f64>,
    /// Weight of every materialized chord.
    pub infinitesimal: BTreeMap<ChordId, f64>,
    /// Series terms summed: `k = 0..=truncation_depth`.
    pub truncation_depth: u32,
    /// Bound on both the truncation error of each chord weight and the total
    /// foot mass any gate loses to chords beyond the truncation depth.
    pub tail_bound: f64,
    /// Growth rate damping the series.
    pub lambda: f64,
    /// Eigen-residual of the real heights, carried from the Perron solve.
    pub residual: f64,
}

impl WeightAssignment {
    /// JSON description keyed by edge and chord id.
    pub fn to_json(&self, sys: &ThickMapSystem) -> Value {
        let real: BTreeMap<String, f64> = sys
            .graph
            .strips
            .iter()
            .zip(&self.real)
            .map(|(s, &y)| (s.name.clone(), y))
            .collect();
        let chords: BTreeMap<String, f64> = self
            .infinitesimal
            .iter()
            .map(|(id, &y)| (id.0.to_string(), y))
            .collect();
        json!({
            "real": real,
            "infinitesimal": chords,
            "truncation_depth": self.truncation_depth,
            "tail_bound": self.tail_bound,
            "lambda": self.lambda,
            "residual": self.residual,
        })
    }
}

/// Operator 1-norm of the strand rows: largest column sum.
fn strand_norm(blocks: &TrackBlocks) -> f64 {
    let cols = blocks.real.dim();
    (0..cols)
        .map(|j| {
            blocks
                .infinitesimal
                .values()
                .map(|row| row[j])
                .sum::<u64>() as f64
        })
        .fold(0.0, f64::max)
}

/// Sum the damped chord-weight series to `depth + 1` terms.
///
/// With no strand rows every chord weight is exactly zero and the tail
/// bound vanishes; otherwise the growth rate must exceed 1.
pub fn complete_weights(
    blocks: &TrackBlocks,
    perron: &PerronData,
    depth: u32,
) -> Result<WeightAssignment, MeasureError> {
    let lambda = perron.lambda;
    let ids: BTreeSet<ChordId> = blocks
        .infinitesimal
        .keys()
        .chain(blocks.sigma.keys())
        .chain(blocks.sigma.values())
        .copied()
        .collect();
    let mut weights: BTreeMap<ChordId, f64> = ids.iter().map(|&id| (id, 0.0)).collect();

    let mut carried: BTreeMap<ChordId, f64> = BTreeMap::new();
    for (&id, row) in &blocks.infinitesimal {
        let mass: f64 = row
            .iter()
            .zip(&perron.y)
            .map(|(&n, &y)| n as f64 * y)
            .sum();
        if mass != 0.0 {
            carried.insert(id, mass);
        }
    }

    if carried.is_empty() {
        return Ok(WeightAssignment {
            real: perron.y.clone(),
            infinitesimal: weights,
            truncation_depth: depth,
            tail_bound: 0.0,
            lambda,
            residual: perron.residual,
        });
    }
    if lambda <= 1.0 {
        return Err(MeasureError::NonExpanding { lambda });
    }

    let y_norm: f64 = perron.y.iter().map(|y| y.abs()).sum();
    let tail_bound =
        2.0 * strand_norm(blocks) * y_norm * lambda.powi(-(depth as i32)) / (lambda - 1.0);

    for k in 0..=depth {
        let scale = lambda.powi(-(k as i32 + 1));
        for (&id, &mass) in &carried {
            *weights.get_mut(&id).expect("seeded id") += mass * scale;
        }
        if k == depth {
            break;
        }
        let mut next: BTreeMap<ChordId, f64> = BTreeMap::new();
        for (&id, &mass) in &carried {
            // Chords of the final layer have no chord-map entry; mass
            // arriving there belongs to unmaterialized chords and is
            // dropped without affecting the materialized weights.
            if let Some(&to) = blocks.sigma.get(&id) {
                *next.entry(to).or_insert(0.0) += mass;
            }
        }
        if next.is_empty() {
            break;
        }
        carried = next;
    }

    Ok(WeightAssignment {
        real: perron.y.clone(),
        infinitesimal: weights,
        truncation_depth: depth,
        tail_bound,
        lambda,
        residual: perron.residual,
    })
}

/// Branch-sum residual at one gate.
#[derive(Debug, Clone)]
pub struct SwitchResidual {
    pub gate: String,
    /// Height of the strip ending at the gate.
    pub expected: f64,
    /// Total chord weight carried by feet on the gate (bubbles count twice).
    pub carried: f64,
    pub residual: f64,
}

/// Result of checking the branch-sum identity at every gate.
#[derive(Debug, Clone)]
pub struct SwitchReport {
    pub residuals: Vec<SwitchResidual>,
    /// Largest residual.
    pub worst: f64,
    /// Residuals up to `tol + tail_bound` pass: unmaterialized chords can
    /// carry at most the tail.
    pub allowance: f64,
    pub pass: bool,
}

impl SwitchReport {
    pub fn to_json(&self) -> Value {
        json!({
            "switches": self
                .residuals
                .iter()
                .map(|r| {
                    json!({
                        "gate": r.gate,
                        "expected": r.expected,
                        "carried": r.carried,
                        "residual": r.residual,
                    })
                })
                .collect::<Vec<_>>(),
            "worst": self.worst,
            "allowance": self.allowance,
            "pass": self.pass,
        })
    }
}

/// Check the branch-sum identity at every gate: the height of the strip
/// must equal the total weight of the chord feet on the gate.
pub fn check_switch_conditions(
    sys: &ThickMapSystem,
    inv: &InvariantTrack,
    w: &WeightAssignment,
    tol: f64,
) -> SwitchReport {
    let mut carried = vec![0.0f64; sys.graph.gates.len()];
    for c in inv.track.chords() {
        let y = w.infinitesimal.get(&c.id).copied().unwrap_or(0.0);
        carried[c.entry.0] += y;
        carried[c.exit.0] += y;
    }

    let mut residuals = Vec::with_capacity(sys.graph.gates.len());
    let mut worst = 0.0f64;
    for (gi, gate) in sys.graph.gates.iter().enumerate() {
        let expected = w.real[gate.strip.0];
        let residual = (expected - carried[gi]).abs();
        worst = worst.max(residual);
        residuals.push(SwitchResidual {
            gate: gate.name.clone(),
            expected,
            carried: carried[gi],
            residual,
        });
    }
    let allowance = tol + w.tail_bound;
    SwitchReport {
        residuals,
        worst,
        allowance,
        pass: worst <= allowance,
    }
}
