use crate::error::{arg, Result};
use crate::measure::{check_exponents, diagonal_cost, ground_cost, PersistenceMeasure};
use crate::transport::ot_distance;

/// Starting centroids for [`quantize`].
#[derive(Debug, Clone, PartialEq)]
pub enum QuantInit {
    /// Explicit centroids; their count overrides `k`.
    Centroids(Vec<(f64, f64)>),
    /// The `k` atoms of largest persistence, ties broken by atom order.
    GreedyPersistence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationConfig {
    pub k: usize,
    pub init: QuantInit,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub p: f64,
    pub q: f64,
}

impl QuantizationConfig {
    pub fn new(k: usize, p: f64) -> Self {
        Self {
            k,
            init: QuantInit::GreedyPersistence,
            max_iter: 100,
            rel_tol: 1e-6,
            p,
            q: p,
        }
    }

    fn validate(&self) -> Result<()> {
        check_exponents(self.p, self.q)?;
        if !(self.rel_tol > 0.0) {
            return arg("rel_tol must be positive");
        }
        match &self.init {
            QuantInit::GreedyPersistence if self.k == 0 => arg("k must be at least 1"),
            QuantInit::Centroids(c) if c.is_empty() => arg("at least one initial centroid is required"),
            QuantInit::Centroids(c) => {
                for &(b, d) in c {
                    if !(b.is_finite() && d.is_finite() && b < d) {
                        return arg(format!("centroid ({b}, {d}) is not above the diagonal"));
                    }
                }
                Ok(())
            }
            QuantInit::GreedyPersistence => Ok(()),
        }
    }
}

/// One accepted Lloyd step.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizeStep {
    pub iteration: usize,
    /// `OT_p^p` between the quantized measure and the input.
    pub loss: f64,
    pub centroids: usize,
    /// Atoms whose cell changed in this step.
    pub reassigned: usize,
    /// Centroids dropped because their cell emptied.
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantization {
    /// Centroids carrying their cell masses.
    pub measure: PersistenceMeasure,
    pub loss: f64,
    pub trace: Vec<QuantizeStep>,
    /// Why iteration stopped: "converged", "max_iter", "no_improvement" or "empty".
    pub stop: &'static str,
}

const DIAGONAL: usize = usize::MAX;

/// Lloyd-style quantization of `mu` into at most `k` atoms plus the diagonal.
///
/// Each step assigns every atom to the nearest centroid or the diagonal,
/// drops centroids with empty cells, and moves each centroid to the
/// mass-weighted `p`-center of its cell. A step is accepted only if the
/// exact `OT_p^p` loss does not increase, so the trace is non-increasing.
pub fn quantize(mu: &PersistenceMeasure, cfg: &QuantizationConfig) -> Result<Quantization> {
    cfg.validate()?;
    if mu.is_empty() {
        return arg("cannot quantize an empty measure");
    }
    let (p, q) = (cfg.p, cfg.q);
    let points: Vec<(f64, f64)> = mu.atoms().iter().map(|a| (a.birth, a.death)).collect();
    let masses: Vec<f64> = mu.atoms().iter().map(|a| a.mass).collect();
    let numerators = mu.numerators();

    let mut centroids = match &cfg.init {
        QuantInit::Centroids(c) => c.clone(),
        QuantInit::GreedyPersistence => {
            let mut order: Vec<usize> = (0..points.len()).collect();
            let pers = |i: usize| points[i].1 - points[i].0;
            order.sort_by(|&i, &j| pers(j).total_cmp(&pers(i)).then(i.cmp(&j)));
            order.truncate(cfg.k);
            order.into_iter().map(|i| points[i]).collect()
        }
    };

    let assign = |centroids: &[(f64, f64)]| -> Vec<usize> {
        points
            .iter()
            .map(|&(b, d)| {
                let mut best = DIAGONAL;
                let mut best_cost = diagonal_cost(b, d, p, q);
                for (c, &(cb, cd)) in centroids.iter().enumerate() {
                    let cost = ground_cost(b - cb, d - cd, p, q);
                    if cost < best_cost || (cost == best_cost && best == DIAGONAL) {
                        best = c;
                        best_cost = cost;
                    }
                }
                best
            })
            .collect()
    };
    // drops empty cells, renumbering the assignment
    let compact = |centroids: &mut Vec<(f64, f64)>, cells: &mut [usize]| -> usize {
        let mut used = vec![false; centroids.len()];
        for &c in cells.iter() {
            if c != DIAGONAL {
                used[c] = true;
            }
        }
        let mut remap = vec![DIAGONAL; centroids.len()];
        let mut kept = Vec::new();
        for (c, &u) in used.iter().enumerate() {
            if u {
                remap[c] = kept.len();
                kept.push(centroids[c]);
            }
        }
        let dropped = centroids.len() - kept.len();
        *centroids = kept;
        for c in cells.iter_mut() {
            if *c != DIAGONAL {
                *c = remap[*c];
            }
        }
        dropped
    };
    let build = |centroids: &[(f64, f64)], cells: &[usize]| -> Result<PersistenceMeasure> {
        match (&numerators, mu.denominator()) {
            (Some(num), Some(den)) => {
                let mut counts = vec![0u64; centroids.len()];
                for (i, &c) in cells.iter().enumerate() {
                    if c != DIAGONAL {
                        counts[c] += num[i];
                    }
                }
                PersistenceMeasure::from_counts(mu.hom_dim, centroids.iter().zip(counts).map(|(&(b, d), n)| (b, d, n)), den)
            }
            _ => {
                let mut cell = vec![0.0; centroids.len()];
                for (i, &c) in cells.iter().enumerate() {
                    if c != DIAGONAL {
                        cell[c] += masses[i];
                    }
                }
                PersistenceMeasure::from_atoms(mu.hom_dim, centroids.iter().zip(cell).map(|(&(b, d), m)| (b, d, m)))
            }
        }
    };
    let loss_of = |m: &PersistenceMeasure| -> Result<f64> { Ok(ot_distance(m, mu, p, q)?.0.powf(p)) };

    let mut cells = assign(&centroids);
    let dropped = compact(&mut centroids, &mut cells);
    let mut current = build(&centroids, &cells)?;
    let mut loss = loss_of(&current)?;
    let mut trace = vec![QuantizeStep {
        iteration: 0,
        loss,
        centroids: centroids.len(),
        reassigned: 0,
        dropped,
    }];
    let mut stop = "max_iter";

    for iteration in 1..=cfg.max_iter {
        if centroids.is_empty() {
            stop = "empty";
            break;
        }
        if loss == 0.0 {
            stop = "converged";
            break;
        }
        let moved: Vec<(f64, f64)> = (0..centroids.len())
            .map(|c| {
                let members: Vec<usize> = (0..points.len()).filter(|&i| cells[i] == c).collect();
                let pts: Vec<(f64, f64)> = members.iter().map(|&i| points[i]).collect();
                let ws: Vec<f64> = members.iter().map(|&i| masses[i]).collect();
                p_center(&pts, &ws, centroids[c], p, q)
            })
            .collect();
        let mut next_cells = assign(&moved);
        let reassigned = next_cells
            .iter()
            .zip(&cells)
            .filter(|(a, b)| a != b)
            .count();
        let mut next_centroids = moved;
        let dropped = compact(&mut next_centroids, &mut next_cells);
        let candidate = build(&next_centroids, &next_cells)?;
        let next_loss = loss_of(&candidate)?;
        if next_loss > loss {
            stop = "no_improvement";
            break;
        }
        let improvement = (loss - next_loss) / loss;
        centroids = next_centroids;
        cells = next_cells;
        current = candidate;
        loss = next_loss;
        trace.push(QuantizeStep {
            iteration,
            loss,
            centroids: centroids.len(),
            reassigned,
            dropped,
        });
        if improvement < cfg.rel_tol {
            stop = "converged";
            break;
        }
    }
    Ok(Quantization {
        measure: current,
        loss,
        trace,
        stop,
    })
}

fn objective(points: &[(f64, f64)], weights: &[f64], c: (f64, f64), p: f64, q: f64) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(&(b, d), &w)| w * ground_cost(b - c.0, d - c.1, p, q))
        .sum()
}

/// Weighted `p`-center of a cell: the weighted mean when `p = q = 2`, else
/// iteratively reweighted averaging started from the better of the mean and
/// the previous centroid, accepting only improving steps.
fn p_center(points: &[(f64, f64)], weights: &[f64], previous: (f64, f64), p: f64, q: f64) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean = (
        points.iter().zip(weights).map(|(x, w)| w * x.0).sum::<f64>() / total,
        points.iter().zip(weights).map(|(x, w)| w * x.1).sum::<f64>() / total,
    );
    let f = |c: (f64, f64)| objective(points, weights, c, p, q);
    if p == 2.0 && q == 2.0 {
        return if f(mean) <= f(previous) { mean } else { previous };
    }
    let mut c = if f(mean) <= f(previous) { mean } else { previous };
    let mut fc = f(c);
    let floor = 1e-12;
    for _ in 0..30 {
        let next = if p == q {
            // separable: each coordinate minimizes sum w |x - c|^p
            let coord = |k: usize| {
                let (mut num, mut den) = (0.0, 0.0);
                for (x, &w) in points.iter().zip(weights) {
                    let v = if k == 0 { x.0 } else { x.1 };
                    let cv = if k == 0 { c.0 } else { c.1 };
                    let r = w * (v - cv).abs().max(floor).powf(p - 2.0);
                    num += r * v;
                    den += r;
                }
                num / den
            };
            (coord(0), coord(1))
        } else {
            let (mut nb, mut nd, mut den) = (0.0, 0.0, 0.0);
            for (x, &w) in points.iter().zip(weights) {
                let (dx, dy) = (x.0 - c.0, x.1 - c.1);
                let r2 = (dx * dx + dy * dy).max(floor * floor);
                let r = w * ground_cost(dx, dy, p, q) / r2;
                nb += r * x.0;
                nd += r * x.1;
                den += r;
            }
            if den > 0.0 {
                (nb / den, nd / den)
            } else {
                c
            }
        };
        let fn_ = f(next);
        if !(fn_ < fc) {
            break;
        }
        let step = ((next.0 - c.0).powi(2) + (next.1 - c.1).powi(2)).sqrt();
        c = next;
        fc = fn_;
        if step < 1e-9 {
            break;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn atoms_as_centroids_are_fixed() {
        let mu = PersistenceMeasure::from_counts(1, [(0.0, 1.0, 1), (2.0, 5.0, 2), (1.0, 4.0, 1)], 1).unwrap();
        let cfg = QuantizationConfig::new(3, 2.0);
        let r = quantize(&mu, &cfg).unwrap();
        assert_eq!(r.loss, 0.0);
        assert_eq!(r.measure.atoms(), mu.atoms());
    }

    #[test]
    fn two_atoms_one_centroid() {
        let mu = PersistenceMeasure::from_counts(1, [(1.0, 3.0, 1), (1.0, 5.0, 1)], 2).unwrap();
        let cfg = QuantizationConfig {
            init: QuantInit::Centroids(vec![(1.0, 3.0)]),
            ..QuantizationConfig::new(1, 2.0)
        };
        let r = quantize(&mu, &cfg).unwrap();
        let a = r.measure.atoms();
        assert_eq!(a.len(), 1);
        assert!((a[0].birth - 1.0).abs() < 1e-12 && (a[0].death - 4.0).abs() < 1e-12);
        assert_eq!(a[0].mass, 1.0);

        // grid search over centroid positions as an oracle
        let mut best = f64::INFINITY;
        let mut arg = (0.0, 0.0);
        for i in 0..=40 {
            for j in 0..=80 {
                let (b, d) = (i as f64 * 0.05, 2.0 + j as f64 * 0.05);
                if b >= d {
                    continue;
                }
                let m = PersistenceMeasure::from_counts(1, [(b, d, 2)], 2).unwrap();
                let l = ot_distance(&m, &mu, 2.0, 2.0).unwrap().0.powi(2);
                if l < best {
                    best = l;
                    arg = (b, d);
                }
            }
        }
        assert_eq!(arg, (1.0, 4.0));
        assert!((r.loss - best).abs() < 1e-12);
    }

    #[test]
    fn empty_cells_are_dropped() {
        let mu = PersistenceMeasure::from_atoms(1, [(0.0, 1.0, 1.0)]).unwrap();
        let cfg = QuantizationConfig {
            init: QuantInit::Centroids(vec![(0.0, 1.0), (50.0, 90.0)]),
            ..QuantizationConfig::new(2, 2.0)
        };
        let r = quantize(&mu, &cfg).unwrap();
        assert_eq!(r.trace[0].dropped, 1);
        assert_eq!(r.measure.len(), 1);
        assert!(quantize(&PersistenceMeasure::empty(1), &cfg).is_err());
    }

    #[test]
    fn p_center_general_p() {
        // p = q = 1: weighted coordinate medians
        let pts = [(0.0, 1.0), (0.2, 3.0), (0.1, 2.0)];
        let c = p_center(&pts, &[1.0, 1.0, 1.0], (0.0, 1.0), 1.0, 1.0);
        assert!((c.0 - 0.1).abs() < 1e-6 && (c.1 - 2.0).abs() < 1e-6, "{c:?}");
        let c3 = p_center(&pts, &[1.0, 1.0, 1.0], (0.0, 1.0), 3.0, 3.0);
        let f = |c| objective(&pts, &[1.0, 1.0, 1.0], c, 3.0, 3.0);
        for &(db, dd) in &[(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            assert!(f(c3) <= f((c3.0 + db, c3.1 + dd)));
        }
    }

    fn measure() -> impl Strategy<Value = PersistenceMeasure> {
        prop::collection::vec((0.0f64..3.0, 0.05f64..2.0, 1u64..4), 1..25)
            .prop_map(|v| PersistenceMeasure::from_counts(1, v.into_iter().map(|(b, l, c)| (b, b + l, c)), 3).unwrap())
    }

    proptest! {
        #[test]
        fn loss_trace_is_non_increasing(mu in measure(), k in 1usize..5, p in 1usize..4) {
            let p = p as f64;
            let r = quantize(&mu, &QuantizationConfig::new(k, p)).unwrap();
            for w in r.trace.windows(2) {
                prop_assert!(w[1].loss <= w[0].loss);
            }
            prop_assert!(r.measure.len() <= k);
            prop_assert!(r.measure.total_mass() <= mu.total_mass() + 1e-12);
            prop_assert_eq!(r.measure.denominator(), Some(3));
        }
    }
}
