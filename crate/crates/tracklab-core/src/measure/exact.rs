//! Exact rational weights for finite tracks with integer growth rate.
//!
//! When push-forward stabilizes, the chord map is total on the finite chord
//! set and the weight system `lambda Y' = Pi Y' + B Y` is a finite linear
//! system.  With a certified integer rate the real heights come from an
//! exact kernel solve of the real block, and the chord weights follow by
//! walking the chord map: tree chords are solved in topological order, and
//! each cycle closes with the geometric-series identity
//! `u = a / (1 - lambda^-L)` for its accumulated inflow `a` and length `L`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use serde_json::{json, Value};

use crate::graph::ThickMapSystem;
use crate::track::{ChordId, InvariantTrack, TrackBlocks};

use super::MeasureError;

/// Exact transverse weights: rational heights and chord weights.
#[derive(Debug, Clone)]
pub struct ExactWeights {
    pub lambda: u64,
    /// Heights of the real edges, normalized to unit 1-norm.
    pub real: Vec<BigRational>,
    /// Weight of every chord of the finite track.
    pub infinitesimal: BTreeMap<ChordId, BigRational>,
}

fn ratio_json(q: &BigRational) -> Value {
    json!({
        "num": q.numer().to_string(),
        "den": q.denom().to_string(),
        "approx": q.to_f64().unwrap_or(f64::NAN),
    })
}

impl ExactWeights {
    pub fn to_json(&self, sys: &ThickMapSystem) -> Value {
        let real: BTreeMap<String, Value> = sys
            .graph
            .strips
            .iter()
            .zip(&self.real)
            .map(|(s, q)| (s.name.clone(), ratio_json(q)))
            .collect();
        let chords: BTreeMap<String, Value> = self
            .infinitesimal
            .iter()
            .map(|(id, q)| (id.0.to_string(), ratio_json(q)))
            .collect();
        json!({
            "lambda": self.lambda,
            "real": real,
            "infinitesimal": chords,
        })
    }
}

/// Kernel vector of `(M - lambda I)` over the rationals, unit 1-norm.
///
/// Errors unless the kernel is exactly one-dimensional.
fn kernel_heights(
    entries: &[Vec<u64>],
    lambda: u64,
) -> Result<Vec<BigRational>, MeasureError> {
    let n = entries.len();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut v = BigRational::from_integer(BigInt::from(entries[i][j]));
                    if i == j {
                        v -= BigRational::from_integer(BigInt::from(lambda));
                    }
                    v
                })
                .collect()
        })
        .collect();

    // Row-reduce, tracking which column each pivot lands in.
    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].clone();
        for v in &mut m[row] {
            *v /= &inv;
        }
        for r in 0..n {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..n {
                    let sub = &m[row][c] * &f;
                    m[r][c] -= sub;
                }
            }
        }
        pivot_col_of_row.push(col);
        row += 1;
        if row == n {
            break;
        }
    }

    let free: Vec<usize> = (0..n)
        .filter(|c| !pivot_col_of_row.contains(c))
        .collect();
    if free.len() != 1 {
        return Err(MeasureError::DegenerateKernel {
            lambda,
            dim: free.len(),
        });
    }
    let fc = free[0];
    let mut y = vec![BigRational::zero(); n];
    y[fc] = BigRational::one();
    for (r, &pc) in pivot_col_of_row.iter().enumerate() {
        y[pc] = -m[r][fc].clone();
    }
    let norm: BigRational = y.iter().map(|v| v.abs()).sum();
    if norm.is_zero() {
        return Err(MeasureError::DegenerateKernel { lambda, dim: 0 });
    }
    Ok(y.into_iter().map(|v| v / &norm).collect())
}

/// Solve the chord-weight system exactly over the finite chord set.
pub fn exact_weights(
    blocks: &TrackBlocks,
    inv: &InvariantTrack,
    lambda: u64,
) -> Result<ExactWeights, MeasureError> {
    if !inv.is_finite() {
        return Err(MeasureError::InfiniteTrack);
    }
    let real = kernel_heights(&blocks.real.entries, lambda)?;
    let lam = BigRational::from_integer(BigInt::from(lambda));

    // Strand-row inflow per chord.
    let ids: Vec<ChordId> = inv.track.chords().iter().map(|c| c.id).collect();
    let mut inflow: BTreeMap<ChordId, BigRational> =
        ids.iter().map(|&id| (id, BigRational::zero())).collect();
    for (&id, row) in &blocks.infinitesimal {
        let mass: BigRational = row
            .iter()
            .zip(&real)
            .map(|(&c, y)| BigRational::from_integer(BigInt::from(c)) * y)
            .sum();
        *inflow.get_mut(&id).expect("materialized strand row") += mass;
    }
    if ids.is_empty() {
        return Ok(ExactWeights {
            lambda,
            real,
            infinitesimal: BTreeMap::new(),
        });
    }
    if lambda <= 1 {
        return Err(MeasureError::NonExpanding {
            lambda: lambda as f64,
        });
    }

    // Split the functional graph of the chord map into cycles and trees.
    let mut on_cycle: BTreeMap<ChordId, bool> = ids.iter().map(|&id| (id, false)).collect();
    for &start in &ids {
        let mut seen: BTreeMap<ChordId, usize> = BTreeMap::new();
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if let Some(&at) = seen.get(&cur) {
                for &c in &path[at..] {
                    on_cycle.insert(c, true);
                }
                break;
            }
            if on_cycle[&cur] {
                break;
            }
            seen.insert(cur, path.len());
            path.push(cur);
            match blocks.sigma.get(&cur) {
                Some(&n) => cur = n,
                None => break,
            }
        }
    }

    // Tree chords in topological order: all chord-map predecessors first.
    let mut pending: BTreeMap<ChordId, usize> = ids.iter().map(|&id| (id, 0)).collect();
    for (&c, &d) in &blocks.sigma {
        *pending.get_mut(&d).expect("materialized image") += usize::from(!on_cycle[&c]);
    }
    let mut weights: BTreeMap<ChordId, BigRational> = BTreeMap::new();
    let mut queue: Vec<ChordId> = ids
        .iter()
        .copied()
        .filter(|id| !on_cycle[id] && pending[id] == 0)
        .collect();
    while let Some(c) = queue.pop() {
        let y = (&inflow[&c]
            + blocks
                .sigma
                .iter()
                .filter(|&(_, &d)| d == c)
                .map(|(p, _)| weights.get(p).cloned().unwrap_or_else(BigRational::zero))
                .sum::<BigRational>())
            / &lam;
        weights.insert(c, y);
        if let Some(&d) = blocks.sigma.get(&c) {
            if !on_cycle[&d] {
                let slot = pending.get_mut(&d).expect("materialized image");
                *slot -= 1;
                if *slot == 0 {
                    queue.push(d);
                }
            }
        }
    }

    // Cycles: close each with the geometric-series identity.
    let mut done: BTreeMap<ChordId, bool> = ids.iter().map(|&id| (id, false)).collect();
    for &start in &ids {
        if !on_cycle[&start] || done[&start] {
            continue;
        }
        let mut cycle = vec![start];
        let mut cur = blocks.sigma[&start];
        while cur != start {
            cycle.push(cur);
            cur = blocks.sigma[&cur];
        }
        // Inflow into each cycle chord from outside the cycle.
        let total: Vec<BigRational> = cycle
            .iter()
            .map(|&c| {
                &inflow[&c]
                    + blocks
                        .sigma
                        .iter()
                        .filter(|&(&p, &d)| d == c && !on_cycle[&p])
                        .map(|(p, _)| weights[p].clone())
                        .sum::<BigRational>()
            })
            .collect();
        // y[i+1] = (total[i+1] + y[i]) / lambda; write y[0] = a + b y[0].
        let mut a = BigRational::zero();
        let mut b = BigRational::one();
        let len = cycle.len();
        for i in 1..=len {
            a = (&total[i % len] + a) / &lam;
            b /= &lam;
        }
        let u = a / (BigRational::one() - b);
        let mut y = u;
        weights.insert(cycle[0], y.clone());
        for i in 1..len {
            y = (&total[i] + y) / &lam;
            weights.insert(cycle[i], y.clone());
        }
        for &c in &cycle {
            done.insert(c, true);
        }
    }

    Ok(ExactWeights {
        lambda,
        real,
        infinitesimal: weights,
    })
}
