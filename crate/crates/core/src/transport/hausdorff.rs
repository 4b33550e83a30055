use super::{canonical_sum, solve_assignment};
use crate::error::{arg, Result};
use crate::pointcloud::{FiniteMetricSpace, PointCloud};

/// Optimal correspondence: every point of either set appears in some pair.
/// `cost` is the reported distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
    pub cost: f64,
}

/// `p`-Hausdorff distance between two clouds with Euclidean ground metric.
pub fn p_hausdorff(x: &PointCloud, y: &PointCloud, p: f64) -> Result<(f64, Correspondence)> {
    if x.dim() != y.dim() {
        return arg(format!("clouds live in dimensions {} and {}", x.dim(), y.dim()));
    }
    let swap = (x.len(), x.coords()).partial_cmp(&(y.len(), y.coords())) == Some(std::cmp::Ordering::Greater);
    let dist = |i: usize, j: usize| euclid(x.point(i), y.point(j));
    if swap {
        let r = edge_cover(y.len(), x.len(), |j, i| dist(i, j), p)?;
        return Ok(flip(r));
    }
    edge_cover(x.len(), y.len(), dist, p)
}

/// `p`-Hausdorff distance between two index subsets of a finite metric space.
pub fn p_hausdorff_metric(space: &FiniteMetricSpace, xs: &[usize], ys: &[usize], p: f64) -> Result<(f64, Correspondence)> {
    if xs.iter().chain(ys).any(|&i| i >= space.len()) {
        return arg("index out of range for the metric space");
    }
    let dist = |i: usize, j: usize| space.distance(xs[i], ys[j]);
    if (xs.len(), xs) > (ys.len(), ys) {
        let r = edge_cover(ys.len(), xs.len(), |j, i| dist(i, j), p)?;
        return Ok(flip(r));
    }
    edge_cover(xs.len(), ys.len(), dist, p)
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

fn flip((d, c): (f64, Correspondence)) -> (f64, Correspondence) {
    let mut pairs: Vec<_> = c.pairs.into_iter().map(|(a, b)| (b, a)).collect();
    pairs.sort();
    (d, Correspondence { pairs, cost: c.cost })
}

/// Minimum-cost edge cover of the complete bipartite graph with edge costs
/// `dist^p`. Edges cheaper than attaching both endpoints to their nearest
/// partners are chosen by an assignment on the reduced costs
/// `c - rowmin - colmin`; every uncovered vertex then takes its nearest edge.
fn edge_cover(n1: usize, n2: usize, dist: impl Fn(usize, usize) -> f64, p: f64) -> Result<(f64, Correspondence)> {
    if !(p.is_finite() && p >= 1.0) {
        return arg(format!("p must be finite and at least 1, got {p}"));
    }
    if n1 == 0 || n2 == 0 {
        return arg("both point sets must be nonempty");
    }
    let mut base = vec![0.0; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            base[i * n2 + j] = dist(i, j);
        }
    }
    let mut scale = 1.0;
    if p >= 8.0 {
        let m = base.iter().copied().fold(0.0, f64::max);
        if m > 0.0 && m.is_finite() {
            scale = m;
        }
    }
    let cost: Vec<f64> = base.iter().map(|d| (d / scale).powf(p)).collect();
    let c = |i: usize, j: usize| cost[i * n2 + j];

    let argmin_row: Vec<usize> = (0..n1)
        .map(|i| (0..n2).fold(0, |b, j| if c(i, j) < c(i, b) { j } else { b }))
        .collect();
    let argmin_col: Vec<usize> = (0..n2)
        .map(|j| (0..n1).fold(0, |b, i| if c(i, j) < c(b, j) { i } else { b }))
        .collect();

    // rows are points of the first set; columns are the second set plus one
    // free dummy per row
    let cols = n2 + n1;
    let mut reduced = vec![0.0; n1 * cols];
    for i in 0..n1 {
        let ri = c(i, argmin_row[i]);
        for j in 0..n2 {
            reduced[i * cols + j] = c(i, j) - ri - c(argmin_col[j], j);
        }
    }
    let assigned = solve_assignment(&reduced, n1, cols)?;

    let mut pairs = Vec::new();
    let mut covered = vec![false; n2];
    for (i, &j) in assigned.iter().enumerate() {
        if j < n2 && reduced[i * cols + j] < 0.0 {
            pairs.push((i, j));
            covered[j] = true;
        } else {
            pairs.push((i, argmin_row[i]));
            covered[argmin_row[i]] = true;
        }
    }
    for j in 0..n2 {
        if !covered[j] {
            pairs.push((argmin_col[j], j));
        }
    }
    pairs.sort();
    pairs.dedup();
    let total = canonical_sum(pairs.iter().map(|&(i, j)| c(i, j)).collect());
    let d = scale * total.powf(1.0 / p);
    Ok((d, Correspondence { pairs, cost: d }))
}
