//! Grid discretisation of the relaxed revenue program and exact LP solves.
//!
//! Nodes are `x_ij = (c + iΔ, c + jΔ)` with `Δ = 1/(n-1)`, stored at index
//! `j * n + i`. The objective is the trapezoid rule applied to the boundary
//! form of the revenue, so it only involves node values.

mod dense;
mod network;

use std::fmt::Write as _;

pub use dense::{solve_dense, DenseProgram, DenseSolution, DenseStatus};
pub use network::{solve_flow, Arc, FlowSolution, FlowStatus};

use crate::closed_forms::cbar;
use crate::error::{Error, Result};
use crate::fields::{PiecewiseField, Point};
use crate::mechanisms::best_deterministic;

/// Pivot budget of both solvers.
pub const MAX_ITERATIONS: usize = 1_000_000;

/// A grid program `max w.u` subject to `u_head - u_tail <= Δ`, `u >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance {
    pub n: usize,
    pub c: f64,
    pub delta: f64,
    /// Objective weight of each node.
    pub weights: Vec<f64>,
    /// Forward differences `(tail, head)`.
    pub differences: Vec<(usize, usize)>,
}

impl LpInstance {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.c + i as f64 * self.delta,
            self.c + j as f64 * self.delta,
        )
    }

    pub fn variable_count(&self) -> usize {
        self.n * self.n
    }

    /// Difference constraints plus one nonnegativity bound per variable.
    pub fn constraint_count(&self) -> usize {
        self.differences.len() + self.variable_count()
    }

    pub fn objective(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, v)| w * v).sum()
    }

    /// Largest violation of any constraint by `u`.
    pub fn max_violation(&self, u: &[f64]) -> f64 {
        let diff = self
            .differences
            .iter()
            .map(|&(t, h)| u[h] - u[t] - self.delta)
            .fold(0.0, f64::max);
        u.iter().map(|v| -v).fold(diff, f64::max)
    }

    /// Node values of a field.
    pub fn restriction(&self, field: &PiecewiseField) -> Result<Vec<f64>> {
        let mut u = vec![0.0; self.variable_count()];
        for j in 0..self.n {
            for i in 0..self.n {
                u[self.index(i, j)] = field.value(self.node(i, j))?;
            }
        }
        Ok(u)
    }

    /// Plain-text dump in CPLEX LP syntax.
    pub fn to_lp_format(&self) -> String {
        let mut s = String::new();
        let name = |k: usize| format!("u_{}_{}", k % self.n, k / self.n);
        let _ = writeln!(s, "\\ grid revenue program, c = {}, n = {}", self.c, self.n);
        let _ = writeln!(s, "Maximize");
        s.push_str(" obj:");
        for (k, w) in self.weights.iter().enumerate() {
            let _ = write!(s, " {:+.17e} {}", w, name(k));
            if k % 4 == 3 {
                s.push_str("\n ");
            }
        }
        let _ = writeln!(s, "\nSubject To");
        for (r, &(t, h)) in self.differences.iter().enumerate() {
            let _ = writeln!(
                s,
                " d{}: {} - {} <= {:.17e}",
                r,
                name(h),
                name(t),
                self.delta
            );
        }
        let _ = writeln!(s, "Bounds");
        for k in 0..self.variable_count() {
            let _ = writeln!(s, " {} >= 0", name(k));
        }
        s.push_str("End\n");
        s
    }
}

/// Builds the grid program at resolution `n >= 4`.
pub fn build_lp(c: f64, n: usize) -> Result<LpInstance> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "grid needs n >= 4, got {n}"
        )));
    }
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "c must be finite and >= 0, got {c}"
        )));
    }
    let delta = 1.0 / (n - 1) as f64;
    let top = c + 1.0;
    let omega = |i: usize| {
        if i == 0 || i == n - 1 {
            0.5 * delta
        } else {
            delta
        }
    };
    let mut weights = vec![0.0; n * n];
    let mut differences = Vec::with_capacity(2 * n * (n - 1));
    for j in 0..n {
        for i in 0..n {
            let mut w = -3.0 * omega(i) * omega(j);
            if i == n - 1 {
                w += top * omega(j);
            }
            if j == n - 1 {
                w += top * omega(i);
            }
            if i == 0 {
                w -= c * omega(j);
            }
            if j == 0 {
                w -= c * omega(i);
            }
            weights[j * n + i] = w;
            if i + 1 < n {
                differences.push((j * n + i, j * n + i + 1));
            }
            if j + 1 < n {
                differences.push((j * n + i, (j + 1) * n + i));
            }
        }
    }
    Ok(LpInstance {
        n,
        c,
        delta,
        weights,
        differences,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub u_grid: Vec<f64>,
    pub iterations: usize,
    pub status: LpStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Network simplex on the min-cost-flow dual.
    #[default]
    Network,
    /// Dense tableau with Bland's rule; practical for `n` up to about 20.
    Dense,
}

pub fn solve(lp: &LpInstance) -> Result<LpSolution> {
    solve_with(lp, Solver::default())
}

pub fn solve_with(lp: &LpInstance, solver: Solver) -> Result<LpSolution> {
    match solver {
        Solver::Network => solve_network(lp),
        Solver::Dense => solve_tableau(lp),
    }
}

fn solve_network(lp: &LpInstance) -> Result<LpSolution> {
    let vars = lp.variable_count();
    let root = vars;
    let mut arcs: Vec<Arc> = lp
        .differences
        .iter()
        .map(|&(tail, head)| Arc {
            tail,
            head,
            cost: lp.delta,
        })
        .collect();
    // u_v >= 0 is pi_root - pi_v <= 0.
    arcs.extend((0..vars).map(|v| Arc {
        tail: v,
        head: root,
        cost: 0.0,
    }));
    let mut balance = lp.weights.clone();
    balance.push(-lp.weights.iter().sum::<f64>());
    // Any simple path costs at most 2.
    let flow = solve_flow(vars + 1, &arcs, &balance, root, 100.0, MAX_ITERATIONS)?;
    let u_grid: Vec<f64> = flow.potential[..vars].iter().map(|&v| v.max(0.0)).collect();
    Ok(LpSolution {
        value: lp.objective(&u_grid),
        u_grid,
        iterations: flow.pivots,
        status: match flow.status {
            FlowStatus::Optimal => LpStatus::Optimal,
            FlowStatus::Infeasible => LpStatus::Unbounded,
        },
    })
}

fn solve_tableau(lp: &LpInstance) -> Result<LpSolution> {
    let vars = lp.variable_count();
    let a = lp
        .differences
        .iter()
        .map(|&(t, h)| {
            let mut row = vec![0.0; vars];
            row[h] = 1.0;
            row[t] = -1.0;
            row
        })
        .collect();
    let program = DenseProgram {
        objective: lp.weights.clone(),
        a,
        b: vec![lp.delta; lp.differences.len()],
    };
    let s = solve_dense(&program, MAX_ITERATIONS)?;
    Ok(LpSolution {
        value: s.value,
        u_grid: s.x,
        iterations: s.iterations,
        status: match s.status {
            DenseStatus::Optimal => LpStatus::Optimal,
            DenseStatus::Unbounded => LpStatus::Unbounded,
        },
    })
}

/// Gap-window witness lower end.
const GAP_WINDOW_LO: f64 = 0.078;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub value: f64,
    pub iterations: usize,
    /// Best deterministic revenue, computed only inside `(0.078, cbar)`.
    pub deterministic_revenue: Option<f64>,
}

impl OracleReport {
    /// Whether the grid optimum beats every deterministic menu; `None`
    /// outside the window.
    pub fn exceeds_deterministic(&self) -> Option<bool> {
        self.deterministic_revenue.map(|r| self.value > r)
    }
}

/// LP value at resolution `n`.
pub fn oracle_value(c: f64, n: usize) -> Result<f64> {
    Ok(oracle_report(c, n)?.value)
}

pub fn oracle_report(c: f64, n: usize) -> Result<OracleReport> {
    let lp = build_lp(c, n)?;
    let s = solve(&lp)?;
    if s.status != LpStatus::Optimal {
        return Err(Error::InvalidProgram(format!(
            "grid program not optimal: {:?}",
            s.status
        )));
    }
    let in_window = c > GAP_WINDOW_LO && c < cbar();
    Ok(OracleReport {
        value: s.value,
        iterations: s.iterations,
        deterministic_revenue: in_window.then(|| best_deterministic(c).revenue),
    })
}
