//! Minimal dense simplex solver for small linear programs of the form
//!
//!   maximize c·x  subject to  Ax ≤ b,  x ≥ 0,  b ≥ 0.
//!
//! Nonnegative right-hand sides make the slack basis feasible immediately,
//! so no phase-1 is needed. Bland's rule guards against cycling on the
//! (heavily degenerate) metric programs this crate feeds in.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;

pub(crate) struct LpSolution {
    pub objective: f64,
    #[allow(dead_code)]
    pub x: Vec<f64>,
}

pub(crate) fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    debug_assert!(b.iter().all(|&v| v >= 0.0));
    debug_assert!(a.iter().all(|row| row.len() == n));

    // tableau: m rows of [A | I | b], objective row [-c | 0 | 0]
    let width = n + m + 1;
    let mut t = vec![vec![0.0f64; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (m + n).max(64);
    for _ in 0..max_pivots {
        // Bland: entering variable = lowest index with negative reduced cost
        let Some(col) = (0..n + m).find(|&j| t[m][j] < -PIVOT_TOL) else {
            let mut x = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t[i][width - 1];
                }
            }
            return Ok(LpSolution {
                objective: -t[m][width - 1],
                x,
            });
        };
        // ratio test; Bland ties broken by lowest basis variable index
        let mut row: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            if t[i][col] > PIVOT_TOL {
                let ratio = t[i][width - 1] / t[i][col];
                let better = match row {
                    None => true,
                    Some(r) => {
                        ratio < best_ratio - 1e-15
                            || ((ratio - best_ratio).abs() <= 1e-15 && basis[i] < basis[r])
                    }
                };
                if better {
                    best_ratio = ratio;
                    row = Some(i);
                }
            }
        }
        let Some(row) = row else {
            return Err(Error::Internal(
                "linear program is unbounded; the feasible region should be compact".into(),
            ));
        };
        // pivot
        let piv = t[row][col];
        for v in t[row].iter_mut() {
            *v /= piv;
        }
        for i in 0..=m {
            if i != row {
                let factor = t[i][col];
                if factor != 0.0 {
                    for j in 0..width {
                        t[i][j] -= factor * t[row][j];
                    }
                }
            }
        }
        basis[row] = col;
    }
    Err(Error::Internal(
        "simplex exceeded its pivot budget; the program is degenerate beyond expectation".into(),
    ))
}
