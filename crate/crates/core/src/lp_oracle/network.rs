//! Primal network simplex for uncapacitated min-cost flow.
//!
//! The grid program `max b.π` subject to `π_head - π_tail <= cost` is the
//! dual of `min cost.f` subject to `inflow - outflow = b`, `f >= 0`; the
//! optimal tree's node potentials solve it. The initial tree consists of
//! big-M artificial arcs to the root and is strongly feasible; the leaving
//! arc is the last blocking arc after the apex, which keeps it so and rules
//! out cycling.

use std::collections::VecDeque;

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowStatus {
    Optimal,
    /// Artificial flow remained at the optimum.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub status: FlowStatus,
    pub cost: f64,
    /// Node potentials with `potential[root] = 0`.
    pub potential: Vec<f64>,
    pub flow: Vec<f64>,
    pub pivots: usize,
}

struct Tree {
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
    adjacent: Vec<Vec<usize>>,
    in_tree: Vec<bool>,
}

/// Solves min-cost flow with node balances `balance` (`inflow - outflow`,
/// summing to zero) over `arcs`, rooted at `root`. `big_m` must exceed the
/// cost of every simple path.
pub fn solve_flow(
    nodes: usize,
    arcs: &[Arc],
    balance: &[f64],
    root: usize,
    big_m: f64,
    max_pivots: usize,
) -> Result<FlowSolution> {
    if balance.len() != nodes || root >= nodes {
        return Err(Error::InvalidProgram(
            "balance vector does not match node count".into(),
        ));
    }
    if arcs
        .iter()
        .any(|a| a.tail >= nodes || a.head >= nodes || !a.cost.is_finite())
    {
        return Err(Error::InvalidProgram(
            "arc endpoint or cost out of range".into(),
        ));
    }
    let real = arcs.len();
    let mut all: Vec<Arc> = arcs.to_vec();
    let mut flow = vec![0.0; real];
    // One artificial arc per non-root node. Zero-flow arcs point away from
    // the root.
    for v in 0..nodes {
        if v == root {
            continue;
        }
        let b = balance[v];
        if b < 0.0 {
            all.push(Arc {
                tail: v,
                head: root,
                cost: big_m,
            });
            flow.push(-b);
        } else {
            all.push(Arc {
                tail: root,
                head: v,
                cost: big_m,
            });
            flow.push(b);
        }
    }
    let mut tree = Tree {
        parent: vec![usize::MAX; nodes],
        parent_arc: vec![usize::MAX; nodes],
        depth: vec![0; nodes],
        potential: vec![0.0; nodes],
        adjacent: vec![Vec::new(); nodes],
        in_tree: vec![false; all.len()],
    };
    for k in real..all.len() {
        tree.in_tree[k] = true;
        tree.adjacent[all[k].tail].push(k);
        tree.adjacent[all[k].head].push(k);
    }
    rebuild(&mut tree, &all, root);

    let mut pivots = 0;
    let mut k_side: Vec<(usize, bool)> = Vec::new();
    let mut l_side: Vec<(usize, bool)> = Vec::new();
    loop {
        // Dantzig: most negative reduced cost.
        let mut entering = None;
        let mut best = -EPS;
        for (k, a) in all.iter().enumerate().take(real) {
            if tree.in_tree[k] {
                continue;
            }
            let rc = a.cost - tree.potential[a.head] + tree.potential[a.tail];
            if rc < best {
                best = rc;
                entering = Some(k);
            }
        }
        let Some(e) = entering else { break };
        if pivots == max_pivots {
            return Err(Error::IterationLimit(max_pivots));
        }
        pivots += 1;

        // Cycle orientation follows the entering arc tail -> head, closing
        // through the tree from head back to tail.
        let (k, l) = (all[e].tail, all[e].head);
        k_side.clear();
        l_side.clear();
        let (mut a, mut b) = (k, l);
        while a != b {
            if tree.depth[a] >= tree.depth[b] {
                // Traversed parent(a) -> a.
                let arc = tree.parent_arc[a];
                k_side.push((arc, all[arc].head == a));
                a = tree.parent[a];
            } else {
                // Traversed b -> parent(b).
                let arc = tree.parent_arc[b];
                l_side.push((arc, all[arc].tail == b));
                b = tree.parent[b];
            }
        }
        // Order from the apex: down to k, entering arc, up from l.
        let order = k_side.iter().rev().chain(l_side.iter());
        let mut delta = f64::INFINITY;
        let mut leaving = e;
        for &(arc, forward) in order {
            if !forward && flow[arc] <= delta {
                delta = flow[arc];
                leaving = arc;
            }
        }
        if !delta.is_finite() {
            return Err(Error::InvalidProgram("unbounded flow cycle".into()));
        }
        for &(arc, forward) in k_side.iter().chain(l_side.iter()) {
            if forward {
                flow[arc] += delta;
            } else {
                flow[arc] -= delta;
            }
        }
        flow[e] += delta;
        flow[leaving] = 0.0;

        tree.in_tree[leaving] = false;
        let (lt, lh) = (all[leaving].tail, all[leaving].head);
        tree.adjacent[lt].retain(|&x| x != leaving);
        tree.adjacent[lh].retain(|&x| x != leaving);
        tree.in_tree[e] = true;
        tree.adjacent[k].push(e);
        tree.adjacent[l].push(e);
        rebuild(&mut tree, &all, root);
    }

    let artificial_flow: f64 = flow[real..].iter().sum();
    let scale = balance.iter().map(|b| b.abs()).sum::<f64>().max(1.0);
    let status = if artificial_flow > 1e-9 * scale {
        FlowStatus::Infeasible
    } else {
        FlowStatus::Optimal
    };
    flow.truncate(real);
    let cost = flow.iter().zip(arcs).map(|(f, a)| f * a.cost).sum();
    Ok(FlowSolution {
        status,
        cost,
        potential: tree.potential,
        flow,
        pivots,
    })
}

/// Recomputes parents, depths and potentials by breadth-first search.
fn rebuild(t: &mut Tree, arcs: &[Arc], root: usize) {
    let mut queue = VecDeque::with_capacity(t.parent.len());
    t.parent[root] = root;
    t.parent_arc[root] = usize::MAX;
    t.depth[root] = 0;
    t.potential[root] = 0.0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        for idx in 0..t.adjacent[v].len() {
            let k = t.adjacent[v][idx];
            if k == t.parent_arc[v] {
                continue;
            }
            let a = arcs[k];
            let (w, pot) = if a.tail == v {
                (a.head, t.potential[v] + a.cost)
            } else {
                (a.tail, t.potential[v] - a.cost)
            };
            t.parent[w] = v;
            t.parent_arc[w] = k;
            t.depth[w] = t.depth[v] + 1;
            t.potential[w] = pot;
            queue.push_back(w);
        }
    }
}
