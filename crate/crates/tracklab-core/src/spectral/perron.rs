//! Perron–Frobenius eigendata by power iteration, with exact certification
//! of integer eigenvalues.

use crate::graph::ThickMapSystem;

use super::matrix::{classify_matrix, transition_matrix, MatrixClass, NonnegIntMatrix};
use super::SpectralError;

const ITERATION_CAP: u64 = 1_000_000;

/// Leading eigendata of an irreducible transition matrix.
///
/// `y` is the right eigenvector (rectangle heights downstream), `x` the left
/// eigenvector (widths); both are positive and normalized to unit 1-norm.
#[derive(Debug, Clone)]
pub struct PerronData {
    pub lambda: f64,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    /// Max of the two final 1-norm residuals |M·v − λ·v|₁.
    pub residual: f64,
    pub iterations: u64,
    /// Set when λ was certified to be exactly this integer (determinant test
    /// in exact arithmetic).
    pub lambda_integer: Option<u64>,
}

/// Power iteration on `M` and `Mᵀ` until successive normalized iterates
/// differ by less than `tol` in the 1-norm.  Cyclic permutation matrices
/// short-circuit to the exact answer λ = 1.
pub fn perron_eigen(m: &NonnegIntMatrix, tol: f64) -> Result<PerronData, SpectralError> {
    match classify_matrix(m)? {
        MatrixClass::Reducible => return Err(SpectralError::Reducible),
        MatrixClass::IrreduciblePeriodic(_) if m.is_permutation() => {
            let n = m.dim();
            let uniform = vec![1.0 / n as f64; n];
            return Ok(PerronData {
                lambda: 1.0,
                y: uniform.clone(),
                x: uniform,
                residual: 0.0,
                iterations: 0,
                lambda_integer: Some(1),
            });
        }
        _ => {}
    }

    let n = m.dim();
    let apply = |transpose: bool, v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let a = if transpose {
                    m.entries[j][i]
                } else {
                    m.entries[i][j]
                };
                out[i] += a as f64 * v[j];
            }
        }
        out
    };
    let normalize = |v: &mut [f64]| -> f64 {
        let s: f64 = v.iter().map(|x| x.abs()).sum();
        for x in v.iter_mut() {
            *x /= s;
        }
        s
    };

    let mut iterations = 0;
    let mut vecs = [vec![1.0 / n as f64; n], vec![1.0 / n as f64; n]];
    let mut lambdas = [0.0f64; 2];
    for (side, vec) in vecs.iter_mut().enumerate() {
        let transpose = side == 1;
        loop {
            let mut next = apply(transpose, vec);
            let lambda = normalize(&mut next);
            let diff: f64 = next
                .iter()
                .zip(vec.iter())
                .map(|(a, b)| (a - b).abs())
                .sum();
            *vec = next;
            lambdas[side] = lambda;
            iterations += 1;
            if diff < tol {
                break;
            }
            if iterations > ITERATION_CAP {
                return Err(SpectralError::NonConvergence { cap: ITERATION_CAP });
            }
        }
    }
    let [y, x] = vecs;
    let lambda = lambdas[0];

    let residual_of = |transpose: bool, v: &[f64], lambda: f64| -> f64 {
        apply(transpose, v)
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - lambda * b).abs())
            .sum()
    };
    let residual = residual_of(false, &y, lambda).max(residual_of(true, &x, lambdas[1]));

    // Exact certification: if λ is within tolerance of an integer, test that
    // integer with an exact determinant.
    let rounded = lambda.round();
    let lambda_integer = if rounded >= 1.0
        && (lambda - rounded).abs() < tol.max(1e-9) * 10.0
        && certify_integer_eigenvalue(m, rounded as i128)
    {
        Some(rounded as u64)
    } else {
        None
    };
    let lambda = lambda_integer.map(|v| v as f64).unwrap_or(lambda);

    Ok(PerronData {
        lambda,
        y,
        x,
        residual,
        iterations,
        lambda_integer,
    })
}

/// Is `candidate` exactly an eigenvalue of `m`?  Decided by fraction-free
/// Gaussian elimination of `candidate·I − M` over the integers.
pub fn certify_integer_eigenvalue(m: &NonnegIntMatrix, candidate: i128) -> bool {
    let n = m.dim();
    let mut a: Vec<Vec<i128>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let diag = if i == j { candidate } else { 0 };
                    diag - m.entries[i][j] as i128
                })
                .collect()
        })
        .collect();
    // Bareiss elimination; determinant is zero iff some pivot column dies.
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                // Entire column below is zero: determinant vanishes unless
                // the remaining minor is trivially nonzero; with a zero
                // pivot column the determinant is zero.
                return true;
            };
            a.swap(k, swap);
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    a[n - 1][n - 1] == 0
}

/// Topological entropy of the system: `ln λ` of its transition matrix.
pub fn entropy(sys: &ThickMapSystem) -> Result<f64, SpectralError> {
    let m = transition_matrix(sys);
    let data = perron_eigen(&m, 1e-12)?;
    Ok(data.lambda.ln())
}
