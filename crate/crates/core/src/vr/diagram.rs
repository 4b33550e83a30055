use std::cmp::Ordering;
use std::io::Write;

use serde::Deserialize;

use crate::error::{arg, Error, Result};
use crate::fmt::g17;

/// An off-diagonal point of a persistence diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
    pub multiplicity: u32,
}

impl DiagramPoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Persistence diagram of one homology dimension in canonical form:
/// points sorted lexicographically by `(birth, death)` with coincident points
/// merged into multiplicities, and essential births sorted ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub hom_dim: usize,
    points: Vec<DiagramPoint>,
    essential: Vec<f64>,
}

fn cmp_pair(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

impl PersistenceDiagram {
    pub fn empty(hom_dim: usize) -> Self {
        Self {
            hom_dim,
            ..Self::default()
        }
    }

    /// Canonical diagram from raw `(birth, death)` pairs. Pairs with
    /// `birth == death` are dropped.
    ///
    /// Fails on non-finite values or `birth > death`.
    pub fn from_pairs(
        hom_dim: usize,
        pairs: impl IntoIterator<Item = (f64, f64)>,
        essential: impl IntoIterator<Item = f64>,
    ) -> Result<Self> {
        Self::from_weighted(hom_dim, pairs.into_iter().map(|(b, d)| (b, d, 1)), essential)
    }

    /// Like [`from_pairs`](Self::from_pairs) with explicit multiplicities.
    pub fn from_weighted(
        hom_dim: usize,
        points: impl IntoIterator<Item = (f64, f64, u32)>,
        essential: impl IntoIterator<Item = f64>,
    ) -> Result<Self> {
        let mut raw = Vec::new();
        for (b, d, m) in points {
            if !b.is_finite() || !d.is_finite() {
                return arg(format!("diagram point ({b}, {d}) is not finite"));
            }
            if b > d {
                return arg(format!("diagram point ({b}, {d}) lies below the diagonal"));
            }
            if m == 0 {
                return arg("multiplicities must be at least 1");
            }
            if b < d {
                raw.push((b, d, m));
            }
        }
        raw.sort_by(|x, y| cmp_pair((x.0, x.1), (y.0, y.1)));
        let mut merged: Vec<DiagramPoint> = Vec::with_capacity(raw.len());
        for (b, d, m) in raw {
            match merged.last_mut() {
                Some(last) if last.birth == b && last.death == d => last.multiplicity += m,
                _ => merged.push(DiagramPoint {
                    birth: b,
                    death: d,
                    multiplicity: m,
                }),
            }
        }
        let mut essential: Vec<f64> = essential.into_iter().collect();
        if essential.iter().any(|b| !b.is_finite()) {
            return arg("essential births must be finite");
        }
        essential.sort_by(f64::total_cmp);
        Ok(Self {
            hom_dim,
            points: merged,
            essential,
        })
    }

    /// Distinct off-diagonal points with multiplicities.
    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    /// Births of classes that never die.
    pub fn essential(&self) -> &[f64] {
        &self.essential
    }

    /// Off-diagonal points repeated by multiplicity.
    pub fn expanded(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat_n((p.birth, p.death), p.multiplicity as usize))
            .collect()
    }

    /// Number of off-diagonal points counted with multiplicity.
    pub fn len(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps points with `death - birth >= tau` and every essential class.
    pub fn filter_by_persistence(&self, tau: f64) -> Self {
        Self {
            hom_dim: self.hom_dim,
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| p.persistence() >= tau)
                .collect(),
            essential: self.essential.clone(),
        }
    }

    /// Replaces every essential class by a finite point dying at `scale`.
    pub fn truncate_essential(&self, scale: f64) -> Result<Self> {
        let extra = self.essential.iter().map(|&b| (b, scale, 1));
        let pts = self.points.iter().map(|p| (p.birth, p.death, p.multiplicity));
        Self::from_weighted(self.hom_dim, pts.chain(extra), std::iter::empty())
    }

    /// Drops the essential classes.
    pub fn without_essential(&self) -> Self {
        Self {
            hom_dim: self.hom_dim,
            points: self.points.clone(),
            essential: Vec::new(),
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "{{\"hom_dim\": {}, \"points\": [", self.hom_dim)?;
        for (i, p) in self.points.iter().enumerate() {
            let sep = if i == 0 { "" } else { ", " };
            write!(out, "{sep}[{}, {}, {}]", g17(p.birth), g17(p.death), p.multiplicity)?;
        }
        write!(out, "], \"essential\": [")?;
        for (i, b) in self.essential.iter().enumerate() {
            let sep = if i == 0 { "" } else { ", " };
            write!(out, "{sep}{}", g17(*b))?;
        }
        write!(out, "]}}")?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DiagramJson = serde_json::from_str(text)?;
        raw.into_diagram()
    }

    /// Parses either a single diagram object or an array of them.
    pub fn list_from_json(text: &str) -> Result<Vec<Self>> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value {
            serde_json::Value::Array(items) => items
                .into_iter()
                .map(|v| serde_json::from_value::<DiagramJson>(v)?.into_diagram())
                .collect(),
            other => Ok(vec![serde_json::from_value::<DiagramJson>(other)?.into_diagram()?]),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagramJson {
    hom_dim: usize,
    points: Vec<(f64, f64, u32)>,
    essential: Vec<f64>,
}

impl DiagramJson {
    fn into_diagram(self) -> Result<PersistenceDiagram> {
        PersistenceDiagram::from_weighted(self.hom_dim, self.points, self.essential).map_err(|e| match e {
            Error::Argument(m) => Error::Parse { line: 1, message: m },
            other => other,
        })
    }
}

/// Writes a list of diagrams as a JSON array.
pub fn write_diagrams_json<W: Write>(diagrams: &[PersistenceDiagram], mut out: W) -> Result<()> {
    write!(out, "[")?;
    for (i, d) in diagrams.iter().enumerate() {
        if i > 0 {
            write!(out, ",\n ")?;
        }
        d.write_json(&mut out)?;
    }
    writeln!(out, "]")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form_merges_and_sorts() {
        let d = PersistenceDiagram::from_pairs(1, [(2.0, 5.0), (0.0, 1.0), (0.0, 1.0), (1.0, 1.0)], [3.0, 0.0]).unwrap();
        assert_eq!(d.points().len(), 2);
        assert_eq!(d.points()[0], DiagramPoint { birth: 0.0, death: 1.0, multiplicity: 2 });
        assert_eq!(d.len(), 3);
        assert_eq!(d.essential(), &[0.0, 3.0]);
        assert!(PersistenceDiagram::from_pairs(0, [(2.0, 1.0)], []).is_err());
    }

    #[test]
    fn filter_by_persistence_examples() {
        let d = PersistenceDiagram::from_pairs(1, [(0.0, 0.05), (1.0, 1.5)], [0.0]).unwrap();
        assert_eq!(d.filter_by_persistence(0.0), d);
        let f = d.filter_by_persistence(0.1);
        assert_eq!(f.expanded(), vec![(1.0, 1.5)]);
        assert_eq!(f.essential(), &[0.0]);
        assert_eq!(f.filter_by_persistence(0.1), f);
    }

    #[test]
    fn truncation_turns_essentials_into_points() {
        let d = PersistenceDiagram::from_pairs(0, [(0.0, 1.0)], [0.0]).unwrap();
        let t = d.truncate_essential(2.0).unwrap();
        assert_eq!(t.expanded(), vec![(0.0, 1.0), (0.0, 2.0)]);
        assert!(t.essential().is_empty());
    }

    #[test]
    fn json_layout() {
        let d = PersistenceDiagram::from_pairs(1, [(0.0, 0.1), (0.0, 0.1)], [0.5]).unwrap();
        assert_eq!(d.to_json(), r#"{"hom_dim": 1, "points": [[0, 0.10000000000000001, 2]], "essential": [0.5]}"#);
        assert!(PersistenceDiagram::from_json(r#"{"hom_dim": 0, "points": [[1, 0, 1]], "essential": []}"#).is_err());
        assert!(PersistenceDiagram::from_json(r#"{"hom_dim": 0, "points": [[0, 1, 0]], "essential": []}"#).is_err());
        let list = PersistenceDiagram::list_from_json(&format!("[{}, {}]", d.to_json(), d.to_json())).unwrap();
        assert_eq!(list, vec![d.clone(), d]);
    }

    proptest! {
        #[test]
        fn json_round_trip(pairs in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 0..30),
                           ess in prop::collection::vec(0.0f64..1.0, 0..3)) {
            let pairs: Vec<_> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
            let d = PersistenceDiagram::from_pairs(2, pairs, ess).unwrap();
            prop_assert_eq!(PersistenceDiagram::from_json(&d.to_json()).unwrap(), d);
        }

        #[test]
        fn filtering_is_monotone_and_idempotent(pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..30), tau in 0.0f64..0.5) {
            let pairs: Vec<_> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
            let d = PersistenceDiagram::from_pairs(1, pairs, []).unwrap();
            let f = d.filter_by_persistence(tau);
            prop_assert!(f.len() <= d.len());
            prop_assert_eq!(f.filter_by_persistence(tau), f);
        }
    }
}
