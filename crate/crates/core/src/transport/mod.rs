//! Exact distance solvers with certificates.
//!
//! Point indices in a [`Matching`] refer to [`PersistenceDiagram::expanded`]
//! (points repeated by multiplicity); atom indices in a [`TransportPlan`]
//! refer to [`PersistenceMeasure::atoms`].

mod assignment;
mod bottleneck;
mod hausdorff;
mod network_simplex;
mod ot;
mod wasserstein;

use std::io::Write;

pub use assignment::solve_assignment;
pub use bottleneck::bottleneck;
pub use hausdorff::{p_hausdorff, p_hausdorff_metric, Correspondence};
pub use network_simplex::{network_simplex, FlowNetwork, FlowValue};
pub use ot::{ot_distance, pairwise_ot_matrix};
pub use wasserstein::{wasserstein, WassersteinOutcome};
pub(crate) use wasserstein::matched_points;

use crate::error::Result;
use crate::fmt::g17;
use crate::measure::{diagonal_cost, diagonal_distance, ground_cost, q_norm};

/// One side of a matched pair: an indexed point or the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Point(usize),
    Diagonal,
}

impl Slot {
    fn json(self) -> String {
        match self {
            Slot::Point(i) => i.to_string(),
            Slot::Diagonal => "\"diagonal\"".into(),
        }
    }
}

/// Optimal bijection between two diagrams. `cost` is the reported distance.
/// Essential classes are paired in `essential` by index into the sorted
/// essential lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub pairs: Vec<(Slot, Slot)>,
    pub essential: Vec<(usize, usize)>,
    pub cost: f64,
}

impl Matching {
    pub fn swapped(&self) -> Matching {
        let mut pairs: Vec<_> = self.pairs.iter().map(|&(a, b)| (b, a)).collect();
        pairs.sort();
        Matching {
            pairs,
            essential: self.essential.iter().map(|&(a, b)| (b, a)).collect(),
            cost: self.cost,
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "{{\"cost\": {}, \"pairs\": [", g17(self.cost))?;
        for (k, (a, b)) in self.pairs.iter().enumerate() {
            let sep = if k == 0 { "" } else { ", " };
            write!(out, "{sep}[{}, {}]", a.json(), b.json())?;
        }
        write!(out, "], \"essential\": [")?;
        for (k, (a, b)) in self.essential.iter().enumerate() {
            let sep = if k == 0 { "" } else { ", " };
            write!(out, "{sep}[{a}, {b}]")?;
        }
        writeln!(out, "]}}")?;
        Ok(())
    }
}

/// Optimal partial transport plan. `cost` is the reported distance.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub flows: Vec<(Slot, Slot, f64)>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "{{\"cost\": {}, \"flows\": [", g17(self.cost))?;
        for (k, (a, b, m)) in self.flows.iter().enumerate() {
            let sep = if k == 0 { "" } else { ", " };
            write!(out, "{sep}[{}, {}, {}]", a.json(), b.json(), g17(*m))?;
        }
        writeln!(out, "]}}")?;
        Ok(())
    }
}

/// Ground cost between two diagram points or a point and the diagonal.
pub(crate) fn slot_distance(left: &[(f64, f64)], right: &[(f64, f64)], a: Slot, b: Slot, q: f64) -> f64 {
    match (a, b) {
        (Slot::Point(i), Slot::Point(j)) => {
            let (x, y) = (left[i], right[j]);
            q_norm(x.0 - y.0, x.1 - y.1, q)
        }
        (Slot::Point(i), Slot::Diagonal) => diagonal_distance(left[i].0, left[i].1, q),
        (Slot::Diagonal, Slot::Point(j)) => diagonal_distance(right[j].0, right[j].1, q),
        (Slot::Diagonal, Slot::Diagonal) => 0.0,
    }
}

/// Ground cost raised to `p` after dividing coordinates by `scale`.
pub(crate) fn slot_cost(left: &[(f64, f64)], right: &[(f64, f64)], a: Slot, b: Slot, p: f64, q: f64, scale: f64) -> f64 {
    match (a, b) {
        (Slot::Point(i), Slot::Point(j)) => {
            let (x, y) = (left[i], right[j]);
            ground_cost((x.0 - y.0) / scale, (x.1 - y.1) / scale, p, q)
        }
        (Slot::Point(i), Slot::Diagonal) => diagonal_cost(0.0, (left[i].1 - left[i].0) / scale, p, q),
        (Slot::Diagonal, Slot::Point(j)) => diagonal_cost(0.0, (right[j].1 - right[j].0) / scale, p, q),
        (Slot::Diagonal, Slot::Diagonal) => 0.0,
    }
}

/// Largest ground distance when `p` is large enough for powers to
/// overflow, else 1.
pub(crate) fn cost_scale(left: &[(f64, f64)], right: &[(f64, f64)], p: f64, q: f64) -> f64 {
    if p < 8.0 {
        return 1.0;
    }
    let mut m: f64 = 0.0;
    for i in 0..left.len() {
        m = m.max(slot_distance(left, right, Slot::Point(i), Slot::Diagonal, q));
        for j in 0..right.len() {
            m = m.max(slot_distance(left, right, Slot::Point(i), Slot::Point(j), q));
        }
    }
    for j in 0..right.len() {
        m = m.max(slot_distance(left, right, Slot::Diagonal, Slot::Point(j), q));
    }
    if m > 0.0 && m.is_finite() {
        m
    } else {
        1.0
    }
}

/// Whether `(a, b)` should be solved as `(b, a)` so that every distance is
/// exactly symmetric.
pub(crate) fn swap_order(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    let key = |v: &[(f64, f64)]| v.len();
    if key(a) != key(b) {
        return key(a) > key(b);
    }
    for (x, y) in a.iter().zip(b) {
        let c = x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1));
        if c.is_ne() {
            return c.is_gt();
        }
    }
    false
}

/// Sum of non-negative terms in ascending order, so equal multisets give
/// bit-identical totals.
pub(crate) fn canonical_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}
