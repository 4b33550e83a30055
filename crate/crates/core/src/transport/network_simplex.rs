//! Primal network simplex for uncapacitated minimum-cost flow.

use std::fmt::Debug;
use std::ops::{Add, Sub};

use crate::error::{arg, Result};

/// Flow quantities: exact integers or floating point.
pub trait FlowValue: Copy + PartialOrd + Debug + Add<Output = Self> + Sub<Output = Self> {
    const ZERO: Self;
    const MAX: Self;
    fn to_f64(self) -> f64;
    fn is_negative(self) -> bool {
        self < Self::ZERO
    }
}

impl FlowValue for i64 {
    const ZERO: Self = 0;
    const MAX: Self = i64::MAX;
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl FlowValue for f64 {
    const ZERO: Self = 0.0;
    const MAX: Self = f64::INFINITY;
    fn to_f64(self) -> f64 {
        self
    }
}

/// Uncapacitated min-cost flow problem: node supplies (positive) and
/// demands (negative) summing to zero, and arcs with non-negative costs.
#[derive(Debug, Clone)]
pub struct FlowNetwork<F> {
    supply: Vec<F>,
    source: Vec<u32>,
    target: Vec<u32>,
    cost: Vec<f64>,
}

impl<F: FlowValue> FlowNetwork<F> {
    pub fn new(supply: Vec<F>) -> Self {
        Self {
            supply,
            source: Vec::new(),
            target: Vec::new(),
            cost: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.supply.len()
    }

    pub fn arc_count(&self) -> usize {
        self.cost.len()
    }

    pub fn reserve_arcs(&mut self, extra: usize) {
        self.source.reserve(extra);
        self.target.reserve(extra);
        self.cost.reserve(extra);
    }

    /// Adds the arc `from → to`; returns its index.
    pub fn add_arc(&mut self, from: usize, to: usize, cost: f64) -> usize {
        self.source.push(from as u32);
        self.target.push(to as u32);
        self.cost.push(cost);
        self.cost.len() - 1
    }

    pub fn arc(&self, a: usize) -> (usize, usize, f64) {
        (self.source[a] as usize, self.target[a] as usize, self.cost[a])
    }
}

const UP: bool = true;

/// Optimal flow on every arc.
pub fn network_simplex<F: FlowValue>(net: &FlowNetwork<F>) -> Result<Vec<F>> {
    let n = net.node_count();
    let m = net.arc_count();
    if net.cost.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return arg("arc costs must be finite and non-negative");
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let root = n;
    let max_cost = net.cost.iter().copied().fold(0.0, f64::max);
    let scale = if max_cost > 0.0 { 1.0 / max_cost } else { 1.0 };
    let art_cost = (n as f64 + 1.0) * 2.0;
    let total = m + n;

    // arcs m..m+n are artificial, joining node u to the root
    let mut source: Vec<usize> = net.source.iter().map(|&s| s as usize).collect();
    let mut target: Vec<usize> = net.target.iter().map(|&t| t as usize).collect();
    let mut cost: Vec<f64> = net.cost.iter().map(|c| c * scale).collect();
    let mut flow = vec![F::ZERO; total];
    let mut in_tree = vec![false; total];

    let mut parent = vec![root; n + 1];
    let mut pred = vec![usize::MAX; n + 1];
    let mut pred_up = vec![UP; n + 1];
    let mut pi = vec![0.0f64; n + 1];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut child_pos = vec![0usize; n + 1];
    let mut depth = vec![1usize; n + 1];
    depth[root] = 0;
    parent[root] = usize::MAX;

    for u in 0..n {
        let a = m + u;
        let s = net.supply[u];
        if s.is_negative() {
            source.push(root);
            target.push(u);
            flow[a] = F::ZERO - s;
            pred_up[u] = !UP;
            pi[u] = art_cost;
        } else {
            source.push(u);
            target.push(root);
            flow[a] = s;
            pred_up[u] = UP;
            pi[u] = -art_cost;
        }
        cost.push(art_cost);
        in_tree[a] = true;
        pred[u] = a;
        child_pos[u] = children[root].len();
        children[root].push(u);
    }

    let eps = 1e-12;
    let block = ((total as f64).sqrt().ceil() as usize).max(10);
    let mut next_arc = 0usize;
    let mut stack: Vec<usize> = Vec::new();

    loop {
        // block-search pricing over real arcs (artificial arcs never re-enter)
        let mut entering = usize::MAX;
        let mut best = -eps;
        let mut scanned = 0;
        let mut in_block = 0;
        while scanned < m {
            let a = next_arc;
            next_arc += 1;
            if next_arc == m {
                next_arc = 0;
            }
            scanned += 1;
            in_block += 1;
            if !in_tree[a] {
                let rc = cost[a] + pi[source[a]] - pi[target[a]];
                if rc < best {
                    best = rc;
                    entering = a;
                }
            }
            if in_block == block {
                if entering != usize::MAX {
                    break;
                }
                in_block = 0;
            }
        }
        if entering == usize::MAX {
            break;
        }

        // cycle: entering arc first → second, then back through the tree
        let (first, second) = (source[entering], target[entering]);
        let join = {
            let (mut a, mut b) = (first, second);
            while a != b {
                if depth[a] >= depth[b] {
                    a = parent[a];
                } else {
                    b = parent[b];
                }
            }
            a
        };
        let mut delta = F::MAX;
        let mut u_out = usize::MAX;
        let mut out_on_first = true;
        let mut u = first;
        while u != join {
            // traversed downward: arcs pointing up lose flow
            if pred_up[u] == UP && flow[pred[u]] < delta {
                delta = flow[pred[u]];
                u_out = u;
                out_on_first = true;
            }
            u = parent[u];
        }
        let mut u = second;
        while u != join {
            // traversed upward: arcs pointing down lose flow
            if pred_up[u] != UP && flow[pred[u]] <= delta {
                delta = flow[pred[u]];
                u_out = u;
                out_on_first = false;
            }
            u = parent[u];
        }
        if u_out == usize::MAX {
            return arg("flow problem is unbounded");
        }

        // augment
        if delta > F::ZERO {
            flow[entering] = flow[entering] + delta;
            let mut u = first;
            while u != join {
                let a = pred[u];
                flow[a] = if pred_up[u] == UP { flow[a] - delta } else { flow[a] + delta };
                u = parent[u];
            }
            let mut u = second;
            while u != join {
                let a = pred[u];
                flow[a] = if pred_up[u] == UP { flow[a] + delta } else { flow[a] - delta };
                u = parent[u];
            }
        }

        // drop the leaving arc and re-hang the detached subtree
        let leaving = pred[u_out];
        in_tree[leaving] = false;
        in_tree[entering] = true;
        let (u_in, v_in) = if out_on_first { (first, second) } else { (second, first) };

        // reverse the path u_in → u_out
        let detach = |children: &mut Vec<Vec<usize>>, child_pos: &mut Vec<usize>, c: usize, p: usize| {
            let pos = child_pos[c];
            children[p].swap_remove(pos);
            if pos < children[p].len() {
                let moved = children[p][pos];
                child_pos[moved] = pos;
            }
        };
        let attach = |children: &mut Vec<Vec<usize>>, child_pos: &mut Vec<usize>, c: usize, p: usize| {
            child_pos[c] = children[p].len();
            children[p].push(c);
        };
        detach(&mut children, &mut child_pos, u_out, parent[u_out]);
        let mut prev = v_in;
        let mut prev_arc = entering;
        let mut u = u_in;
        loop {
            let old_parent = parent[u];
            let old_arc = pred[u];
            if u != u_out {
                detach(&mut children, &mut child_pos, u, old_parent);
            }
            parent[u] = prev;
            pred[u] = prev_arc;
            pred_up[u] = source[prev_arc] == u;
            attach(&mut children, &mut child_pos, u, prev);
            if u == u_out {
                break;
            }
            prev = u;
            prev_arc = old_arc;
            u = old_parent;
        }

        // potentials and depths of the moved subtree
        let shift = {
            let a = pred[u_in];
            let want = if source[a] == u_in {
                // cost + pi[u_in] - pi[v_in] = 0
                pi[v_in] - cost[a]
            } else {
                pi[v_in] + cost[a]
            };
            want - pi[u_in]
        };
        stack.clear();
        stack.push(u_in);
        while let Some(x) = stack.pop() {
            pi[x] += shift;
            depth[x] = depth[parent[x]] + 1;
            stack.extend_from_slice(&children[x]);
        }
    }

    let art_left = (m..total).any(|a| flow[a] > F::ZERO && flow[a].to_f64() > 1e-9);
    if art_left {
        return arg("flow problem is infeasible");
    }
    flow.truncate(m);
    Ok(flow)
}
