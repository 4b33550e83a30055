use std::cmp::Ordering;

use crate::error::{arg, Result};
use crate::pointcloud::FiniteMetricSpace;

/// A simplex with the scale at which it enters the filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSimplex {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    /// Diameter of the vertex set (0 for vertices).
    pub filtration_value: f64,
}

impl FilteredSimplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Filtration order: value, then dimension, then vertices lexicographically.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.filtration_value
            .total_cmp(&other.filtration_value)
            .then(self.vertices.len().cmp(&other.vertices.len()))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

/// `min_i max_j d(i, j)`: at this scale the Rips complex is a cone over the
/// minimising vertex, so nothing larger changes homology.
pub fn enclosing_radius(n: usize, dist: impl Fn(usize, usize) -> f64) -> f64 {
    (0..n)
        .map(|i| (0..n).map(|j| dist(i, j)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Every simplex of dimension `<= max_dim + 1` with diameter `<= max_scale`,
/// sorted in filtration order. `max_scale = None` uses the enclosing radius.
pub fn build_vr_filtration(
    space: &FiniteMetricSpace,
    max_dim: usize,
    max_scale: Option<f64>,
) -> Result<Vec<FilteredSimplex>> {
    let n = space.len();
    let scale = match max_scale {
        Some(s) if s.is_nan() || s <= 0.0 => return arg("max_scale must be positive"),
        Some(s) => s,
        None => enclosing_radius(n, |i, j| space.distance(i, j)),
    };
    let top = max_dim + 1;
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(top + 1);

    // depth-first clique enumeration in lexicographic vertex order
    fn extend(
        space: &FiniteMetricSpace,
        scale: f64,
        top: usize,
        stack: &mut Vec<usize>,
        diam: f64,
        out: &mut Vec<FilteredSimplex>,
    ) {
        out.push(FilteredSimplex {
            vertices: stack.clone(),
            filtration_value: diam,
        });
        if stack.len() > top {
            return;
        }
        let last = *stack.last().expect("nonempty stack");
        for v in (last + 1)..space.len() {
            let d = stack.iter().map(|&u| space.distance(u, v)).fold(diam, f64::max);
            if d <= scale {
                stack.push(v);
                extend(space, scale, top, stack, d, out);
                stack.pop();
            }
        }
    }

    for v in 0..n {
        stack.push(v);
        extend(space, scale, top, &mut stack, 0.0, &mut out);
        stack.pop();
    }
    out.sort_by(FilteredSimplex::filtration_cmp);
    Ok(out)
}
