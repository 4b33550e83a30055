use std::collections::VecDeque;

use super::{slot_distance, swap_order, Matching, Slot};
use crate::error::{arg, Result};
use crate::vr::PersistenceDiagram;

/// Bottleneck distance with `q`-norm ground cost. Essential classes are
/// matched in birth order; unequal essential counts give `+inf`.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram, q: f64) -> Result<(f64, Matching)> {
    if q.is_nan() || q < 1.0 {
        return arg(format!("q must be at least 1, got {q}"));
    }
    let (a, b) = (d1.expanded(), d2.expanded());
    let mut matching = if swap_order(&a, &b) {
        matched_points(&b, &a, q).swapped()
    } else {
        matched_points(&a, &b, q)
    };
    let (e1, e2) = (d1.essential(), d2.essential());
    if e1.len() != e2.len() {
        matching.cost = f64::INFINITY;
        return Ok((f64::INFINITY, matching));
    }
    for (i, (x, y)) in e1.iter().zip(e2).enumerate() {
        matching.essential.push((i, i));
        matching.cost = matching.cost.max((x - y).abs());
    }
    Ok((matching.cost, matching))
}

fn matched_points(a: &[(f64, f64)], b: &[(f64, f64)], q: f64) -> Matching {
    let (n1, n2) = (a.len(), b.len());
    let pair = |i: usize, j: usize| slot_distance(a, b, Slot::Point(i), Slot::Point(j), q);
    let diag_a: Vec<f64> = (0..n1).map(|i| slot_distance(a, b, Slot::Point(i), Slot::Diagonal, q)).collect();
    let diag_b: Vec<f64> = (0..n2).map(|j| slot_distance(a, b, Slot::Diagonal, Slot::Point(j), q)).collect();

    let mut candidates: Vec<f64> = Vec::with_capacity(n1 * n2 + n1 + n2 + 1);
    candidates.push(0.0);
    candidates.extend_from_slice(&diag_a);
    candidates.extend_from_slice(&diag_b);
    for i in 0..n1 {
        for j in 0..n2 {
            candidates.push(pair(i, j));
        }
    }
    candidates.sort_by(f64::total_cmp);
    // keep the largest value of every cluster of near-equal candidates
    let mut levels: Vec<f64> = Vec::with_capacity(candidates.len());
    for &c in &candidates {
        match levels.last_mut() {
            Some(last) if c - *last <= 1e-12 => *last = c,
            _ => levels.push(c),
        }
    }

    // left: a then diagonal copies of b; right: b then diagonal copies of a
    let n = n1 + n2;
    let graph = |t: f64| -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); n];
        for i in 0..n1 {
            for j in 0..n2 {
                if pair(i, j) <= t {
                    adj[i].push(j as u32);
                }
            }
            if diag_a[i] <= t {
                adj[i].push((n2 + i) as u32);
            }
        }
        for j in 0..n2 {
            if diag_b[j] <= t {
                adj[n1 + j].push(j as u32);
            }
            adj[n1 + j].extend((n2..n).map(|k| k as u32));
        }
        adj
    };

    // the largest level is always feasible: everything may go to the diagonal
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    let mut best = hopcroft_karp(&graph(levels[hi]), n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let m = hopcroft_karp(&graph(levels[mid]), n);
        if m.iter().all(|&r| r != NONE) {
            best = m;
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }

    let mut pairs = Vec::new();
    let mut cost: f64 = 0.0;
    for (row, &col) in best.iter().enumerate() {
        let left = if row < n1 { Slot::Point(row) } else { Slot::Diagonal };
        let right = if (col as usize) < n2 { Slot::Point(col as usize) } else { Slot::Diagonal };
        if left != Slot::Diagonal || right != Slot::Diagonal {
            cost = cost.max(slot_distance(a, b, left, right, q));
            pairs.push((left, right));
        }
    }
    pairs.sort();
    Matching {
        pairs,
        essential: Vec::new(),
        cost,
    }
}

const NONE: u32 = u32::MAX;

/// Maximum matching of a bipartite graph with `n` nodes per side; returns
/// the partner of every left node.
fn hopcroft_karp(adj: &[Vec<u32>], n: usize) -> Vec<u32> {
    let mut left = vec![NONE; n];
    let mut right = vec![NONE; n];
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let mut next = vec![0usize; n];
    loop {
        queue.clear();
        for u in 0..n {
            if left[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = right[v as usize];
                if w == NONE {
                    found = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        if !found {
            return left;
        }
        next.fill(0);
        for u in 0..n {
            if left[u] == NONE {
                augment(u, adj, &mut left, &mut right, &mut dist, &mut next);
            }
        }
    }
}

fn augment(u: usize, adj: &[Vec<u32>], left: &mut [u32], right: &mut [u32], dist: &mut [u32], next: &mut [usize]) -> bool {
    while next[u] < adj[u].len() {
        let v = adj[u][next[u]] as usize;
        next[u] += 1;
        let w = right[v];
        let ok = if w == NONE {
            true
        } else {
            dist[w as usize] == dist[u] + 1 && augment(w as usize, adj, left, right, dist, next)
        };
        if ok {
            left[u] = v as u32;
            right[v] = u as u32;
            return true;
        }
    }
    dist[u] = u32::MAX;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diagram(points: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_pairs(1, points.iter().copied(), []).unwrap()
    }

    #[test]
    fn examples() {
        let inf = f64::INFINITY;
        let d = diagram(&[(0.0, 2.0), (1.0, 3.0)]);
        assert_eq!(bottleneck(&d, &d, inf).unwrap().0, 0.0);
        assert_eq!(bottleneck(&diagram(&[(0.0, 2.0)]), &diagram(&[]), inf).unwrap().0, 1.0);
        assert_eq!(bottleneck(&diagram(&[(0.0, 2.0)]), &diagram(&[(0.0, 2.5)]), inf).unwrap().0, 0.5);
    }

    #[test]
    fn essentials() {
        let a = PersistenceDiagram::from_pairs(0, [], [0.0, 1.0]).unwrap();
        let b = PersistenceDiagram::from_pairs(0, [], [0.25, 1.0]).unwrap();
        let c = PersistenceDiagram::from_pairs(0, [], [0.0]).unwrap();
        assert_eq!(bottleneck(&a, &b, 2.0).unwrap().0, 0.25);
        assert_eq!(bottleneck(&a, &c, 2.0).unwrap().0, f64::INFINITY);
    }

    fn brute(a: &[(f64, f64)], b: &[(f64, f64)], q: f64) -> f64 {
        fn rec(a: &[(f64, f64)], b: &[(f64, f64)], q: f64, i: usize, used: &mut Vec<bool>, cur: f64, best: &mut f64) {
            if i == a.len() {
                let mut m = cur;
                for (j, &u) in used.iter().enumerate() {
                    if !u {
                        m = m.max(slot_distance(a, b, Slot::Diagonal, Slot::Point(j), q));
                    }
                }
                *best = best.min(m);
                return;
            }
            let d = slot_distance(a, b, Slot::Point(i), Slot::Diagonal, q);
            rec(a, b, q, i + 1, used, cur.max(d), best);
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    let d = slot_distance(a, b, Slot::Point(i), Slot::Point(j), q);
                    rec(a, b, q, i + 1, used, cur.max(d), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(a, b, q, 0, &mut vec![false; b.len()], 0.0, &mut best);
        best
    }

    fn points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..5.0, 0.01f64..3.0), 0..6)
            .prop_map(|v| v.into_iter().map(|(b, l)| (b, b + l)).collect())
    }

    proptest! {
        #[test]
        fn equals_enumeration(a in points(), b in points(), qinf in any::<bool>()) {
            let q = if qinf { f64::INFINITY } else { 2.0 };
            let (da, db) = (diagram(&a), diagram(&b));
            let (d, m) = bottleneck(&da, &db, q).unwrap();
            prop_assert_eq!(d, brute(&da.expanded(), &db.expanded(), q));
            prop_assert_eq!(m.pairs.iter().filter(|p| matches!(p.0, Slot::Point(_))).count(), da.len());
            prop_assert_eq!(m.pairs.iter().filter(|p| matches!(p.1, Slot::Point(_))).count(), db.len());
        }

        #[test]
        fn metric_axioms(a in points(), b in points(), c in points()) {
            let q = f64::INFINITY;
            let (a, b, c) = (diagram(&a), diagram(&b), diagram(&c));
            let ab = bottleneck(&a, &b, q).unwrap().0;
            prop_assert_eq!(ab, bottleneck(&b, &a, q).unwrap().0);
            let ac = bottleneck(&a, &c, q).unwrap().0;
            let bc = bottleneck(&b, &c, q).unwrap().0;
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert_eq!(ab == 0.0, a == b);
        }
    }
}
