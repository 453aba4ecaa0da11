//! Transition matrices of the induced graph map and their irreducibility
//! classification.

use std::fmt;

use serde::Serialize;

use crate::graph::{StripIdx, ThickMapSystem};

use super::SpectralError;

/// Square non-negative integer matrix with edge labels.  Entry `(i, j)`
/// counts how often the image path of edge `j` traverses edge `i` (in either
/// direction).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonnegIntMatrix {
    pub labels: Vec<String>,
    /// Row-major entries: `entries[i][j]`.
    pub entries: Vec<Vec<u64>>,
}

impl NonnegIntMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn mul(&self, other: &NonnegIntMatrix) -> NonnegIntMatrix {
        let n = self.dim();
        let mut entries = vec![vec![0u64; n]; n];
        for i in 0..n {
            for k in 0..n {
                if self.entries[i][k] == 0 {
                    continue;
                }
                for j in 0..n {
                    entries[i][j] += self.entries[i][k] * other.entries[k][j];
                }
            }
        }
        NonnegIntMatrix {
            labels: self.labels.clone(),
            entries,
        }
    }

    pub fn pow(&self, mut n: u32) -> NonnegIntMatrix {
        let dim = self.dim();
        let mut result = NonnegIntMatrix {
            labels: self.labels.clone(),
            entries: (0..dim)
                .map(|i| (0..dim).map(|j| u64::from(i == j)).collect())
                .collect(),
        };
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        result
    }

    /// Is the matrix a permutation matrix (exactly one 1 per row and
    /// column)?
    pub fn is_permutation(&self) -> bool {
        let n = self.dim();
        let mut col_seen = vec![false; n];
        for row in &self.entries {
            let mut ones = 0;
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => {
                        ones += 1;
                        if col_seen[j] {
                            return false;
                        }
                        col_seen[j] = true;
                    }
                    _ => return false,
                }
            }
            if ones != 1 {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for NonnegIntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .entries
            .iter()
            .flatten()
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(1)
            .max(self.labels.iter().map(|l| l.len()).max().unwrap_or(1));
        let lw = self.labels.iter().map(|l| l.len()).max().unwrap_or(1);
        write!(f, "{:lw$} ", "")?;
        for label in &self.labels {
            write!(f, " {:>width$}", label)?;
        }
        writeln!(f)?;
        for (i, row) in self.entries.iter().enumerate() {
            write!(f, "{:lw$} ", self.labels[i])?;
            for v in row {
                write!(f, " {:>width$}", v)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Irreducibility classification of a non-negative matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixClass {
    Reducible,
    IrreduciblePeriodic(u32),
    IrreducibleAperiodic,
}

/// Count edge traversals of each image path.
pub fn transition_matrix(sys: &ThickMapSystem) -> NonnegIntMatrix {
    let n = sys.graph.strips.len();
    let labels = sys.graph.strips.iter().map(|s| s.name.clone()).collect();
    let mut entries = vec![vec![0u64; n]; n];
    for (j, path) in sys.edge_image.iter().enumerate() {
        for i in 0..n {
            entries[i][j] = path.crossings_of(StripIdx(i)) as u64;
        }
    }
    NonnegIntMatrix { labels, entries }
}

/// Classify via strong connectivity of the digraph with an arc `j → i`
/// whenever entry `(i, j)` is positive, then the cycle-length gcd.
pub fn classify_matrix(m: &NonnegIntMatrix) -> Result<MatrixClass, SpectralError> {
    let n = m.dim();
    if n == 0 {
        return Err(SpectralError::EmptyMatrix);
    }
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&i| m.entries[i][j] > 0).collect())
        .collect();
    let pred: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| m.entries[i][j] > 0).collect())
        .collect();

    // Strong connectivity: everything reachable from 0 both ways.
    let reach = |adj: &Vec<Vec<usize>>| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    if !reach(&succ).iter().all(|&b| b) || !reach(&pred).iter().all(|&b| b) {
        return Ok(MatrixClass::Reducible);
    }

    // Period: gcd over all arcs of (level(u) + 1 − level(v)) in a BFS
    // layering from state 0.
    let mut level = vec![None::<i64>; n];
    level[0] = Some(0);
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut g: i64 = 0;
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            match level[v] {
                None => {
                    level[v] = Some(level[u].unwrap() + 1);
                    queue.push_back(v);
                }
                Some(lv) => {
                    g = gcd(g, level[u].unwrap() + 1 - lv);
                }
            }
        }
    }
    // All levels assigned (strongly connected); gcd of closed differences.
    let p = g.unsigned_abs() as u32;
    if p <= 1 {
        Ok(MatrixClass::IrreducibleAperiodic)
    } else {
        Ok(MatrixClass::IrreduciblePeriodic(p))
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}
