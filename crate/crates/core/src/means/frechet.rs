use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{arg, Result};
use crate::measure::{diagram_to_measure, total_persistence};
use crate::rng::rng;
use crate::transport::{matched_points, wasserstein, Slot};
use crate::vr::PersistenceDiagram;

/// Starting estimate for [`frechet_mean`].
#[derive(Debug, Clone, PartialEq)]
pub enum FrechetInit {
    /// The input with the median total persistence (lower median, ties by index).
    Median,
    /// The input at this index.
    Index(usize),
    /// An input chosen uniformly at random from this seed.
    Seed(u64),
    /// An explicit diagram.
    Diagram(PersistenceDiagram),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetConfig {
    pub init: FrechetInit,
    pub max_iter: usize,
}

impl Default for FrechetConfig {
    fn default() -> Self {
        Self {
            init: FrechetInit::Median,
            max_iter: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetStep {
    pub iteration: usize,
    /// Fréchet function of the estimate entering this iteration.
    pub value: f64,
    /// Points deleted plus points spawned by the update.
    pub changes: usize,
    /// Estimate points within `1e-3` relative persistence of the diagonal.
    pub near_diagonal: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetMean {
    pub diagram: PersistenceDiagram,
    pub value: f64,
    pub trace: Vec<FrechetStep>,
    pub converged: bool,
}

/// Fréchet function `(1/B) sum_i W_2^2(candidate, D_i)` with `q = 2`, on the
/// finite parts of all diagrams.
pub fn frechet_function(candidate: &PersistenceDiagram, diagrams: &[PersistenceDiagram]) -> Result<f64> {
    if diagrams.is_empty() {
        return arg("Fréchet function of an empty list");
    }
    let c = candidate.without_essential();
    let sum: f64 = diagrams
        .iter()
        .map(|d| Ok(wasserstein(&c, &d.without_essential(), 2.0, 2.0)?.distance().powi(2)))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    Ok(sum / diagrams.len() as f64)
}

fn midpoint(x: (f64, f64)) -> f64 {
    0.5 * (x.0 + x.1)
}

/// Minimizer of `sum |y - x|^2 + k d(y)^2` over `y`, where `x` ranges over
/// the real partners and `d` is the distance to the diagonal: each diagonal
/// partner pulls `y` toward its own projection.
fn fixed_matching_optimum(partners: &mut [(f64, f64)], b: usize) -> Option<(f64, f64)> {
    if partners.is_empty() {
        return None;
    }
    partners.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let k = (b - partners.len()) as f64;
    let s = partners.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let m = midpoint(s) / partners.len() as f64;
    let bf = b as f64;
    let y = ((s.0 + k * m) / bf, (s.1 + k * m) / bf);
    if y.0 < y.1 {
        Some(y)
    } else {
        None
    }
}

fn canonical(mut y: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    y.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    y
}

/// Greedy Fréchet mean for `p = q = 2`.
///
/// Alternates optimal matchings of the estimate to every input with the
/// per-point optimum for those matchings. Estimate points matched only to
/// the diagonal are deleted; input points matched to the diagonal spawn a
/// new estimate point at `(x + (B-1) proj(x)) / B`. Stops when an update
/// leaves the estimate unchanged or after `max_iter` iterations. Essential
/// classes are ignored.
pub fn frechet_mean(diagrams: &[PersistenceDiagram], cfg: &FrechetConfig) -> Result<FrechetMean> {
    let Some(first) = diagrams.first() else {
        return arg("Fréchet mean of an empty list");
    };
    if diagrams.iter().any(|d| d.hom_dim != first.hom_dim) {
        return arg("all diagrams must share one homology dimension");
    }
    let b = diagrams.len();
    let inputs: Vec<Vec<(f64, f64)>> = diagrams.iter().map(|d| d.expanded()).collect();
    let start = match &cfg.init {
        FrechetInit::Median => {
            let tp: Vec<f64> = diagrams
                .iter()
                .map(|d| total_persistence(&diagram_to_measure(d), 2.0, 2.0))
                .collect::<Result<_>>()?;
            let mut order: Vec<usize> = (0..b).collect();
            order.sort_by(|&i, &j| tp[i].total_cmp(&tp[j]).then(i.cmp(&j)));
            inputs[order[(b - 1) / 2]].clone()
        }
        FrechetInit::Index(i) if *i < b => inputs[*i].clone(),
        FrechetInit::Index(i) => return arg(format!("init index {i} out of range for {b} diagrams")),
        FrechetInit::Seed(s) => inputs[rng(*s).random_range(0..b)].clone(),
        FrechetInit::Diagram(d) => d.expanded(),
    };
    let mut y = canonical(start);
    let mut trace = Vec::new();
    let mut converged = false;

    for iteration in 0..cfg.max_iter {
        let matchings: Vec<Vec<(Slot, Slot)>> = inputs
            .par_iter()
            .map(|x| matched_points(&y, x, 2.0, 2.0).map(|m| m.pairs))
            .collect::<Result<_>>()?;
        let value = frechet_value(&y, &inputs, &matchings);

        let mut partners: Vec<Vec<(f64, f64)>> = vec![Vec::new(); y.len()];
        let mut spawned = Vec::new();
        for (x, pairs) in inputs.iter().zip(&matchings) {
            for &(s, t) in pairs {
                match (s, t) {
                    (Slot::Point(i), Slot::Point(j)) => partners[i].push(x[j]),
                    (Slot::Diagonal, Slot::Point(j)) => {
                        let m = midpoint(x[j]);
                        let bf = b as f64;
                        let z = ((x[j].0 + (bf - 1.0) * m) / bf, (x[j].1 + (bf - 1.0) * m) / bf);
                        if z.0 < z.1 {
                            spawned.push(z);
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut next = Vec::with_capacity(y.len() + spawned.len());
        let mut deleted = 0;
        for mut p in partners {
            match fixed_matching_optimum(&mut p, b) {
                Some(z) => next.push(z),
                None => deleted += 1,
            }
        }
        let changes = deleted + spawned.len();
        next.extend(spawned);
        let next = canonical(next);
        trace.push(FrechetStep {
            iteration,
            value,
            changes,
            near_diagonal: near_diagonal(&y),
        });
        if next == y {
            converged = true;
            break;
        }
        y = next;
    }

    let diagram = PersistenceDiagram::from_pairs(first.hom_dim, y, [])?;
    let value = frechet_function(&diagram, diagrams)?;
    Ok(FrechetMean {
        diagram,
        value,
        trace,
        converged,
    })
}

fn near_diagonal(y: &[(f64, f64)]) -> usize {
    let scale = y.iter().map(|p| p.1 - p.0).fold(0.0, f64::max);
    y.iter().filter(|p| p.1 - p.0 < 1e-3 * scale).count()
}

fn frechet_value(y: &[(f64, f64)], inputs: &[Vec<(f64, f64)>], matchings: &[Vec<(Slot, Slot)>]) -> f64 {
    let mut total = 0.0;
    for (x, pairs) in inputs.iter().zip(matchings) {
        let mut terms: Vec<f64> = pairs
            .iter()
            .map(|&(s, t)| crate::transport::slot_cost(y, x, s, t, 2.0, 2.0, 1.0))
            .collect();
        terms.sort_by(f64::total_cmp);
        total += terms.iter().sum::<f64>();
    }
    total / inputs.len() as f64
}
