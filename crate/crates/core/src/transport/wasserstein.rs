use super::{canonical_sum, cost_scale, slot_cost, solve_assignment, swap_order, Matching, Slot};
use crate::error::Result;
use crate::measure::check_exponents;
use crate::vr::PersistenceDiagram;

/// Result of a finite-`p` Wasserstein computation.
#[derive(Debug, Clone, PartialEq)]
pub enum WassersteinOutcome {
    Finite { distance: f64, matching: Matching },
    /// The essential birth multisets differ, so the distance is `+inf`.
    EssentialMismatch,
}

impl WassersteinOutcome {
    pub fn distance(&self) -> f64 {
        match self {
            WassersteinOutcome::Finite { distance, .. } => *distance,
            WassersteinOutcome::EssentialMismatch => f64::INFINITY,
        }
    }

    pub fn matching(&self) -> Option<&Matching> {
        match self {
            WassersteinOutcome::Finite { matching, .. } => Some(matching),
            WassersteinOutcome::EssentialMismatch => None,
        }
    }
}

/// `p`-Wasserstein distance with `q`-norm ground cost between the finite
/// parts of two diagrams. Essential classes must agree exactly.
pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64, q: f64) -> Result<WassersteinOutcome> {
    check_exponents(p, q)?;
    if d1.essential() != d2.essential() {
        return Ok(WassersteinOutcome::EssentialMismatch);
    }
    let essential = (0..d1.essential().len()).map(|i| (i, i)).collect();
    let (a, b) = (d1.expanded(), d2.expanded());
    let matching = if swap_order(&a, &b) {
        matched_points(&b, &a, p, q)?.swapped()
    } else {
        matched_points(&a, &b, p, q)?
    };
    let matching = Matching { essential, ..matching };
    Ok(WassersteinOutcome::Finite {
        distance: matching.cost,
        matching,
    })
}

/// Optimal matching between two point lists via the augmented assignment:
/// rows are `a` then diagonal copies of `b`, columns are `b` then diagonal
/// copies of `a`.
pub(crate) fn matched_points(a: &[(f64, f64)], b: &[(f64, f64)], p: f64, q: f64) -> Result<Matching> {
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    let scale = cost_scale(a, b, p, q);
    let cost = |s: Slot, t: Slot| slot_cost(a, b, s, t, p, q, scale);

    let mut matrix = vec![f64::INFINITY; n * n];
    for i in 0..n1 {
        for j in 0..n2 {
            matrix[i * n + j] = cost(Slot::Point(i), Slot::Point(j));
        }
        matrix[i * n + n2 + i] = cost(Slot::Point(i), Slot::Diagonal);
    }
    for j in 0..n2 {
        let row = n1 + j;
        matrix[row * n + j] = cost(Slot::Diagonal, Slot::Point(j));
        for k in 0..n1 {
            matrix[row * n + n2 + k] = 0.0;
        }
    }
    let cols = solve_assignment(&matrix, n, n)?;

    let mut pairs = Vec::with_capacity(n);
    for (row, &col) in cols.iter().enumerate() {
        let left = if row < n1 { Slot::Point(row) } else { Slot::Diagonal };
        let right = if col < n2 { Slot::Point(col) } else { Slot::Diagonal };
        if left != Slot::Diagonal || right != Slot::Diagonal {
            pairs.push((left, right));
        }
    }
    pairs.sort();
    let total = canonical_sum(pairs.iter().map(|&(s, t)| cost(s, t)).collect());
    Ok(Matching {
        pairs,
        essential: Vec::new(),
        cost: scale * total.powf(1.0 / p),
    })
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
        let d = diagram(&[(0.0, 2.0), (1.0, 3.0)]);
        let w = wasserstein(&d, &d, 2.0, 2.0).unwrap();
        assert_eq!(w.distance(), 0.0);
        let pairs = &w.matching().unwrap().pairs;
        assert_eq!(pairs, &vec![(Slot::Point(0), Slot::Point(0)), (Slot::Point(1), Slot::Point(1))]);

        let w = wasserstein(&diagram(&[(0.0, 2.0)]), &diagram(&[]), 2.0, 2.0).unwrap();
        assert!((w.distance() - 2f64.sqrt()).abs() < 1e-15);

        let w = wasserstein(&diagram(&[(0.0, 2.0)]), &diagram(&[(0.0, 2.5)]), 1.0, 1.0).unwrap();
        assert_eq!(w.distance(), 0.5);
    }

    #[test]
    fn essential_mismatch_is_tagged() {
        let a = PersistenceDiagram::from_pairs(0, [(0.0, 1.0)], [0.0]).unwrap();
        let b = PersistenceDiagram::from_pairs(0, [(0.0, 1.0)], []).unwrap();
        assert_eq!(wasserstein(&a, &b, 1.0, 1.0).unwrap(), WassersteinOutcome::EssentialMismatch);
        assert_eq!(wasserstein(&a, &a, 1.0, 1.0).unwrap().distance(), 0.0);
        assert!(wasserstein(&a, &a, 0.5, 1.0).is_err());
    }

    #[test]
    fn large_p_is_rescaled() {
        let a = diagram(&[(0.0, 1e40)]);
        let b = diagram(&[(0.0, 2e40)]);
        let w = wasserstein(&a, &b, 9.0, 9.0).unwrap().distance();
        assert!((w / 1e40 - 1.0).abs() < 1e-12, "{w}");
    }

    fn points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..5.0, 0.01f64..3.0), 0..6)
            .prop_map(|v| v.into_iter().map(|(b, l)| (b, b + l)).collect())
    }

    /// Coordinates on a dyadic grid, where every cost with `p = q` in
    /// {1, 2} is computed without rounding.
    fn grid_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0u32..64, 1u32..48), 0..6)
            .prop_map(|v| v.into_iter().map(|(b, l)| (b as f64 / 16.0, (b + l) as f64 / 16.0)).collect())
    }

    fn brute(a: &[(f64, f64)], b: &[(f64, f64)], p: f64, q: f64) -> f64 {
        // every injection of a subset of a into b; the rest go to the diagonal
        fn rec(a: &[(f64, f64)], b: &[(f64, f64)], p: f64, q: f64, i: usize, used: &mut Vec<bool>, terms: &mut Vec<f64>, best: &mut f64) {
            if i == a.len() {
                let mut all = terms.clone();
                for (j, &u) in used.iter().enumerate() {
                    if !u {
                        all.push(slot_cost(a, b, Slot::Diagonal, Slot::Point(j), p, q, 1.0));
                    }
                }
                *best = best.min(canonical_sum(all));
                return;
            }
            terms.push(slot_cost(a, b, Slot::Point(i), Slot::Diagonal, p, q, 1.0));
            rec(a, b, p, q, i + 1, used, terms, best);
            terms.pop();
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    terms.push(slot_cost(a, b, Slot::Point(i), Slot::Point(j), p, q, 1.0));
                    rec(a, b, p, q, i + 1, used, terms, best);
                    terms.pop();
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(a, b, p, q, 0, &mut vec![false; b.len()], &mut Vec::new(), &mut best);
        best.powf(1.0 / p)
    }

    fn recompute(m: &Matching, a: &[(f64, f64)], b: &[(f64, f64)], p: f64, q: f64) -> f64 {
        let mut left = vec![0; a.len()];
        let mut right = vec![0; b.len()];
        for &(s, t) in &m.pairs {
            if let Slot::Point(i) = s {
                left[i] += 1;
            }
            if let Slot::Point(j) = t {
                right[j] += 1;
            }
        }
        assert!(left.iter().chain(&right).all(|&c| c == 1));
        m.pairs.iter().map(|&(s, t)| slot_cost(a, b, s, t, p, q, 1.0)).sum::<f64>().powf(1.0 / p)
    }

    proptest! {
        #[test]
        fn equals_enumeration_exactly(a in grid_points(), b in grid_points(), p in 1usize..3) {
            let p = p as f64;
            let (da, db) = (diagram(&a), diagram(&b));
            let w = wasserstein(&da, &db, p, p).unwrap();
            prop_assert_eq!(w.distance(), brute(&da.expanded(), &db.expanded(), p, p));
        }

        #[test]
        fn equals_enumeration(a in points(), b in points(), p in 1usize..4, qinf in any::<bool>()) {
            let p = p as f64;
            let q = if qinf { f64::INFINITY } else { p };
            let (da, db) = (diagram(&a), diagram(&b));
            let w = wasserstein(&da, &db, p, q).unwrap();
            let best = brute(&da.expanded(), &db.expanded(), p, q);
            prop_assert!((w.distance() - best).abs() <= 1e-12 * (1.0 + best));
            let back = recompute(w.matching().unwrap(), &da.expanded(), &db.expanded(), p, q);
            prop_assert!((back - w.distance()).abs() <= 1e-9 * (1.0 + w.distance()));
        }

        #[test]
        fn metric_axioms(a in points(), b in points(), c in points(), p in 1usize..4, qinf in any::<bool>()) {
            let p = p as f64;
            let q = if qinf { f64::INFINITY } else { p };
            let (a, b, c) = (diagram(&a), diagram(&b), diagram(&c));
            let ab = wasserstein(&a, &b, p, q).unwrap().distance();
            let ba = wasserstein(&b, &a, p, q).unwrap().distance();
            let bc = wasserstein(&b, &c, p, q).unwrap().distance();
            let ac = wasserstein(&a, &c, p, q).unwrap().distance();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab == 0.0, a == b);
            prop_assert!(ac <= ab + bc + 1e-9);
        }
    }
}
