//! Dense tableau simplex with Bland's rule for `max c.x, A x <= b, x >= 0`
//! with `b >= 0`, so the slack basis is feasible and no phase one is needed.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseStatus {
    Optimal,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub status: DenseStatus,
    pub value: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// A canonical-form program; rows of `a` are dense.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseProgram {
    pub objective: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl DenseProgram {
    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.a.len() != self.b.len() {
            return Err(Error::InvalidProgram(
                "row count differs from rhs length".into(),
            ));
        }
        if self.a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidProgram("ragged constraint matrix".into()));
        }
        if self.b.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidProgram(
                "rhs must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Solves `p`, failing after `max_iterations` pivots.
pub fn solve_dense(p: &DenseProgram, max_iterations: usize) -> Result<DenseSolution> {
    p.validate()?;
    let n = p.objective.len();
    let m = p.b.len();
    let width = n + m + 1;
    // Row m is the objective row: reduced costs -c, value in the last column.
    let mut t = vec![0.0; (m + 1) * width];
    for (i, row) in p.a.iter().enumerate() {
        t[i * width..i * width + n].copy_from_slice(row);
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = p.b[i];
    }
    for j in 0..n {
        t[m * width + j] = -p.objective[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut iterations = 0;
    loop {
        // Bland: lowest-index column with negative reduced cost.
        let Some(col) = (0..n + m).find(|&j| t[m * width + j] < -EPS) else {
            break;
        };
        let mut pivot_row: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = t[i * width + col];
            if a > EPS {
                let ratio = t[i * width + width - 1] / a;
                let better = match pivot_row {
                    None => true,
                    Some(r) => {
                        ratio < best_ratio - EPS
                            || (ratio <= best_ratio + EPS && basis[i] < basis[r])
                    }
                };
                if better {
                    pivot_row = Some(i);
                    best_ratio = best_ratio.min(ratio);
                }
            }
        }
        let Some(row) = pivot_row else {
            return Ok(DenseSolution {
                status: DenseStatus::Unbounded,
                value: f64::INFINITY,
                x: vec![0.0; n],
                iterations,
            });
        };
        if iterations == max_iterations {
            return Err(Error::IterationLimit(max_iterations));
        }
        iterations += 1;
        pivot(&mut t, width, row, col);
        basis[row] = col;
    }

    let mut x = vec![0.0; n];
    for (i, &v) in basis.iter().enumerate() {
        if v < n {
            x[v] = t[i * width + width - 1];
        }
    }
    Ok(DenseSolution {
        status: DenseStatus::Optimal,
        value: t[m * width + width - 1],
        x,
        iterations,
    })
}

fn pivot(t: &mut [f64], width: usize, row: usize, col: usize) {
    let inv = 1.0 / t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v *= inv;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    let nz: Vec<usize> = (0..width).filter(|&j| pivot_row[j] != 0.0).collect();
    for (i, chunk) in t.chunks_mut(width).enumerate() {
        if i == row {
            continue;
        }
        let f = chunk[col];
        if f != 0.0 {
            for &j in &nz {
                chunk[j] -= f * pivot_row[j];
            }
            chunk[col] = 0.0;
        }
    }
}
