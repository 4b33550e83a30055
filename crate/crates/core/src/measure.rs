//! Persistence measures: finite weighted atom sets above the diagonal.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Deserialize;

use crate::error::{arg, Error, Result};
use crate::fmt::g17;
use crate::vr::PersistenceDiagram;

/// Orthogonal projection of `(x, y)` onto the diagonal.
pub fn diagonal_projection(point: (f64, f64)) -> (f64, f64) {
    let m = 0.5 * (point.0 + point.1);
    (m, m)
}

/// The `q`-norm of a planar vector; `q = f64::INFINITY` is the max-norm.
pub fn q_norm(dx: f64, dy: f64, q: f64) -> f64 {
    let (ax, ay) = (dx.abs(), dy.abs());
    if q == f64::INFINITY {
        ax.max(ay)
    } else if q == 1.0 {
        ax + ay
    } else if q == 2.0 {
        ax.hypot(ay)
    } else {
        let m = ax.max(ay);
        if m == 0.0 {
            return 0.0;
        }
        m * ((ax / m).powf(q) + (ay / m).powf(q)).powf(1.0 / q)
    }
}

/// `q`-distance from `(birth, death)` to the diagonal, attained at the
/// midpoint projection for every `q ≥ 1`.
pub fn diagonal_distance(birth: f64, death: f64, q: f64) -> f64 {
    let l = (death - birth).abs();
    if q == f64::INFINITY {
        0.5 * l
    } else if q == 1.0 {
        l
    } else if q == 2.0 {
        l * std::f64::consts::FRAC_1_SQRT_2
    } else {
        l * 2f64.powf(1.0 / q - 1.0)
    }
}

/// `q_norm(dx, dy, q).powf(p)`, skipping the root when `p == q`.
pub fn ground_cost(dx: f64, dy: f64, p: f64, q: f64) -> f64 {
    let (ax, ay) = (dx.abs(), dy.abs());
    if p == q && q.is_finite() {
        if p == 1.0 {
            ax + ay
        } else if p == 2.0 {
            ax * ax + ay * ay
        } else {
            ax.powf(p) + ay.powf(p)
        }
    } else {
        q_norm(dx, dy, q).powf(p)
    }
}

/// `diagonal_distance(birth, death, q).powf(p)`, skipping the root when `p == q`.
pub fn diagonal_cost(birth: f64, death: f64, p: f64, q: f64) -> f64 {
    if p == q && q.is_finite() {
        let l = (death - birth).abs();
        if p == 1.0 {
            l
        } else if p == 2.0 {
            0.5 * l * l
        } else {
            l.powf(p) * 2f64.powf(1.0 - p)
        }
    } else {
        diagonal_distance(birth, death, q).powf(p)
    }
}

/// Validates a transport exponent `p` (finite, ≥ 1) and norm index `q` (≥ 1, may be ∞).
pub fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return arg(format!("exponent p must be finite and at least 1, got {p}"));
    }
    if q.is_nan() || q < 1.0 {
        return arg(format!("norm index q must be at least 1, got {q}"));
    }
    Ok(())
}

/// A weighted point strictly above the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub birth: f64,
    pub death: f64,
    pub mass: f64,
}

/// Atomic persistence measure in canonical form: atoms sorted by
/// `(birth, death)`, coincident atoms merged, all masses positive.
///
/// When `denominator` is `Some(B)` every mass is an exact multiple of `1/B`
/// and [`numerators`](Self::numerators) recovers the integer counts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceMeasure {
    pub hom_dim: usize,
    atoms: Vec<Atom>,
    denominator: Option<u64>,
}

fn key(b: f64, d: f64) -> (u64, u64) {
    // order-preserving bit patterns for finite floats; -0.0 folds into 0.0
    fn ord(x: f64) -> u64 {
        let x = if x == 0.0 { 0.0 } else { x };
        let bits = x.to_bits();
        if bits >> 63 == 1 {
            !bits
        } else {
            bits | 1 << 63
        }
    }
    (ord(b), ord(d))
}

fn check_point(b: f64, d: f64) -> Result<()> {
    if !(b.is_finite() && d.is_finite()) {
        return arg(format!("atom ({b}, {d}) is not finite"));
    }
    if b >= d {
        return arg(format!("atom ({b}, {d}) is not above the diagonal"));
    }
    Ok(())
}

impl PersistenceMeasure {
    pub fn empty(hom_dim: usize) -> Self {
        Self {
            hom_dim,
            ..Self::default()
        }
    }

    /// Measure with real masses. Zero masses are dropped.
    pub fn from_atoms(hom_dim: usize, atoms: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(u64, u64), Atom> = BTreeMap::new();
        for (b, d, m) in atoms {
            check_point(b, d)?;
            if !(m.is_finite() && m >= 0.0) {
                return arg(format!("atom ({b}, {d}) has invalid mass {m}"));
            }
            if m == 0.0 {
                continue;
            }
            merged
                .entry(key(b, d))
                .and_modify(|a| a.mass += m)
                .or_insert(Atom { birth: b, death: d, mass: m });
        }
        Ok(Self {
            hom_dim,
            atoms: merged.into_values().collect(),
            denominator: None,
        })
    }

    /// Measure whose masses are `count / denominator`, merged exactly in
    /// integers before division.
    pub fn from_counts(hom_dim: usize, counts: impl IntoIterator<Item = (f64, f64, u64)>, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return arg("mass denominator must be positive");
        }
        let mut merged: BTreeMap<(u64, u64), (f64, f64, u64)> = BTreeMap::new();
        for (b, d, c) in counts {
            check_point(b, d)?;
            if c == 0 {
                continue;
            }
            let e = merged.entry(key(b, d)).or_insert((b, d, 0));
            e.2 = e.2.checked_add(c).ok_or_else(|| Error::Argument("mass numerator overflow".into()))?;
        }
        Ok(Self {
            hom_dim,
            atoms: merged
                .into_values()
                .map(|(birth, death, c)| Atom {
                    birth,
                    death,
                    mass: c as f64 / denominator as f64,
                })
                .collect(),
            denominator: Some(denominator),
        })
    }

    /// Attaches an exact denominator to real masses, failing unless every
    /// mass is within `1e-9` of a multiple of `1/denominator`.
    pub fn with_denominator(&self, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return arg("mass denominator must be positive");
        }
        let b = denominator as f64;
        let mut counts = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let c = (a.mass * b).round();
            if (a.mass * b - c).abs() > 1e-9 * b.max(1.0) || c < 1.0 {
                return arg(format!("mass {} is not a multiple of 1/{denominator}", a.mass));
            }
            counts.push((a.birth, a.death, c as u64));
        }
        Self::from_counts(self.hom_dim, counts, denominator)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn denominator(&self) -> Option<u64> {
        self.denominator
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Integer numerators over [`denominator`](Self::denominator).
    pub fn numerators(&self) -> Option<Vec<u64>> {
        let b = self.denominator? as f64;
        Some(self.atoms.iter().map(|a| (a.mass * b).round() as u64).collect())
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Total mass as the exact fraction `(numerator, denominator)`.
    pub fn total_mass_exact(&self) -> Option<(u64, u64)> {
        Some((self.numerators()?.iter().sum(), self.denominator?))
    }

    /// Back to a diagram; every mass must be a whole number.
    pub fn to_diagram(&self) -> Result<PersistenceDiagram> {
        let mut points = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let m = a.mass.round();
            if (a.mass - m).abs() > 1e-9 * m.max(1.0) || m > u32::MAX as f64 {
                return arg(format!("mass {} is not an integer multiplicity", a.mass));
            }
            points.push((a.birth, a.death, m as u32));
        }
        PersistenceDiagram::from_weighted(self.hom_dim, points, [])
    }

    /// Diagram with each mass rounded to the nearest integer multiplicity;
    /// atoms rounding to zero disappear.
    pub fn round_to_diagram(&self) -> Result<PersistenceDiagram> {
        let points = self
            .atoms
            .iter()
            .map(|a| (a.birth, a.death, a.mass.round().min(u32::MAX as f64) as u32))
            .filter(|p| p.2 > 0);
        PersistenceDiagram::from_weighted(self.hom_dim, points, [])
    }

    /// All atoms' coordinates multiplied by `s > 0`.
    pub fn scale_coordinates(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return arg("scale must be positive and finite");
        }
        let mut m = self.clone();
        for a in &mut m.atoms {
            a.birth *= s;
            a.death *= s;
        }
        Ok(m)
    }

    /// All masses multiplied by `s > 0`; the exact denominator is dropped.
    pub fn scale_mass(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return arg("mass scale must be positive and finite");
        }
        let mut m = self.clone();
        for a in &mut m.atoms {
            a.mass *= s;
        }
        m.denominator = None;
        Ok(m)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "{{\"hom_dim\": {}, \"atoms\": [", self.hom_dim)?;
        for (i, a) in self.atoms.iter().enumerate() {
            let sep = if i == 0 { "" } else { ", " };
            write!(out, "{sep}[{}, {}, {}]", g17(a.birth), g17(a.death), g17(a.mass))?;
        }
        match self.denominator {
            Some(b) => write!(out, "], \"mass_denominator\": {b}}}")?,
            None => write!(out, "], \"mass_denominator\": null}}")?,
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MeasureJson = serde_json::from_str(text)?;
        let parse = |e: Error| match e {
            Error::Argument(m) => Error::Parse { line: 1, message: m },
            other => other,
        };
        let m = Self::from_atoms(raw.hom_dim, raw.atoms).map_err(parse)?;
        match raw.mass_denominator {
            Some(b) => m.with_denominator(b).map_err(parse),
            None => Ok(m),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureJson {
    hom_dim: usize,
    atoms: Vec<(f64, f64, f64)>,
    mass_denominator: Option<u64>,
}

/// One atom per distinct finite point, mass = multiplicity. Essential classes
/// are not part of the measure.
pub fn diagram_to_measure(diagram: &PersistenceDiagram) -> PersistenceMeasure {
    PersistenceMeasure::from_counts(
        diagram.hom_dim,
        diagram.points().iter().map(|p| (p.birth, p.death, p.multiplicity as u64)),
        1,
    )
    .expect("diagram points are valid atoms")
}

/// `Σ mass · ‖x − x^⊤‖_q^p` over the atoms.
pub fn total_persistence(mu: &PersistenceMeasure, p: f64, q: f64) -> Result<f64> {
    check_exponents(p, q)?;
    Ok(mu
        .atoms
        .iter()
        .map(|a| a.mass * diagonal_cost(a.birth, a.death, p, q))
        .sum())
}
