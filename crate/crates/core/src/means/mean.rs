use crate::error::{arg, Result};
use crate::measure::PersistenceMeasure;
use crate::vr::PersistenceDiagram;

/// Mean persistence measure `(1/B) sum D_i` of `B` diagrams, with masses
/// tracked exactly over the denominator `B`. Essential classes are ignored.
pub fn mean_measure(diagrams: &[PersistenceDiagram]) -> Result<PersistenceMeasure> {
    let Some(first) = diagrams.first() else {
        return arg("mean of an empty list of diagrams");
    };
    if diagrams.iter().any(|d| d.hom_dim != first.hom_dim) {
        return arg("all diagrams must share one homology dimension");
    }
    let counts = diagrams
        .iter()
        .flat_map(|d| d.points().iter().map(|p| (p.birth, p.death, p.multiplicity as u64)));
    PersistenceMeasure::from_counts(first.hom_dim, counts, diagrams.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::diagram_to_measure;
    use crate::transport::ot_distance;
    use proptest::prelude::*;

    fn diagram(points: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_pairs(1, points.iter().copied(), []).unwrap()
    }

    #[test]
    fn examples() {
        let m = mean_measure(&[diagram(&[(0.0, 2.0)]), diagram(&[(0.0, 4.0)])]).unwrap();
        let atoms: Vec<_> = m.atoms().iter().map(|a| (a.birth, a.death, a.mass)).collect();
        assert_eq!(atoms, vec![(0.0, 2.0, 0.5), (0.0, 4.0, 0.5)]);
        assert_eq!(m.denominator(), Some(2));
        assert!(mean_measure(&[]).is_err());
        let other = PersistenceDiagram::empty(0);
        assert!(mean_measure(&[diagram(&[]), other]).is_err());
    }

    fn diagrams() -> impl Strategy<Value = Vec<PersistenceDiagram>> {
        prop::collection::vec(
            prop::collection::vec((0u32..6, 1u32..4), 0..5)
                .prop_map(|v| diagram(&v.into_iter().map(|(b, l)| (b as f64 * 0.5, (b + l) as f64 * 0.5)).collect::<Vec<_>>())),
            1..6,
        )
    }

    fn reals() -> impl Strategy<Value = Vec<PersistenceDiagram>> {
        prop::collection::vec(
            prop::collection::vec((0.0f64..3.0, 0.01f64..2.0), 0..6)
                .prop_map(|v| diagram(&v.into_iter().map(|(b, l)| (b, b + l)).collect::<Vec<_>>())),
            1..6,
        )
    }

    proptest! {
        #[test]
        fn transport_cost_is_convex(ds in reals(), nu in reals(), p in 1usize..4) {
            let p = p as f64;
            let nu = diagram_to_measure(&nu[0]);
            let mean = mean_measure(&ds).unwrap();
            let lhs = ot_distance(&mean, &nu, p, p).unwrap().0.powf(p);
            let rhs = ds
                .iter()
                .map(|d| ot_distance(&diagram_to_measure(d), &nu, p, p).unwrap().0.powf(p))
                .sum::<f64>()
                / ds.len() as f64;
            prop_assert!(lhs <= rhs + 1e-9, "{} > {}", lhs, rhs);
        }

        #[test]
        fn copies_of_one_diagram(d in diagrams(), b in 1usize..5) {
            let d = &d[0];
            let m = mean_measure(&vec![d.clone(); b]).unwrap();
            let base = diagram_to_measure(d);
            let atoms = |m: &PersistenceMeasure| m.atoms().iter().map(|a| (a.birth, a.death, a.mass)).collect::<Vec<_>>();
            prop_assert_eq!(atoms(&m), atoms(&base));
        }

        #[test]
        fn exact_total_mass(ds in diagrams()) {
            let m = mean_measure(&ds).unwrap();
            let total: usize = ds.iter().map(|d| d.len()).sum();
            prop_assert_eq!(m.total_mass_exact(), Some((total as u64, ds.len() as u64)));
        }

        #[test]
        fn linearity_and_permutation(a in diagrams(), b in diagrams(), shift in 0usize..5) {
            let mut all = a.clone();
            all.extend(b.iter().cloned());
            let whole = mean_measure(&all).unwrap();
            let (ma, mb) = (mean_measure(&a).unwrap(), mean_measure(&b).unwrap());
            // the whole mean is (|a| mean_a + |b| mean_b) / (|a| + |b|), so
            // numerators over the common denominator simply add
            let mut expected = std::collections::BTreeMap::new();
            for m in [&ma, &mb] {
                for (atom, c) in m.atoms().iter().zip(m.numerators().unwrap()) {
                    *expected.entry((atom.birth.to_bits(), atom.death.to_bits())).or_insert(0) += c;
                }
            }
            let got: std::collections::BTreeMap<_, _> = whole
                .atoms()
                .iter()
                .zip(whole.numerators().unwrap())
                .map(|(a, c)| ((a.birth.to_bits(), a.death.to_bits()), c))
                .collect();
            prop_assert_eq!(got, expected);

            let mut rotated = all.clone();
            rotated.rotate_left(shift % all.len());
            prop_assert_eq!(mean_measure(&rotated).unwrap(), whole);
        }
    }
}
