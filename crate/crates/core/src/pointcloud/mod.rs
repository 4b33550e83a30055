//! Point clouds, finite metric spaces, synthetic samplers and subsampling.

mod io;
mod sample;

pub use io::{
    load_binary, load_distance_csv, load_point_csv, parse_binary, parse_distance_csv,
    parse_point_csv, save_binary, save_distance_csv, save_point_csv, write_binary, write_distance_csv,
    write_point_csv,
};
pub use sample::{perturb, perturb_metric, sample_annulus, sample_sphere, sample_torus, subsample};

use crate::error::{arg, Result};

/// Points in `R^m`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from row-major coordinates.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return arg("point dimension must be positive");
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return arg(format!(
                "{} coordinates do not form a nonempty set of {dim}-dimensional points",
                coords.len()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return arg("point coordinates must be finite");
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return arg("all points must have the same dimension");
        }
        Self::new(dim, points.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }

    /// The sub-cloud at `indices` (duplicates kept).
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud {
            dim: self.dim,
            coords,
        }
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A symmetric dissimilarity matrix with zero diagonal.
///
/// The triangle inequality is not required: Vietoris–Rips persistence is
/// defined for any symmetric dissimilarity.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Validates and wraps a row-major `n x n` matrix.
    pub fn new(n: usize, dist: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return arg("metric space must have at least one point");
        }
        if dist.len() != n * n {
            return arg(format!("expected {} entries, got {}", n * n, dist.len()));
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return arg(format!("diagonal entry {i} is not zero"));
            }
            for j in 0..n {
                let d = dist[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return arg(format!("entry ({i},{j}) = {d} is not a finite non-negative real"));
                }
                if d != dist[j * n + i] {
                    return arg(format!("matrix is not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(Self { n, dist })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return arg("distance matrix must be square");
        }
        Self::new(n, rows.concat())
    }

    /// Pairwise Euclidean distances of a point cloud.
    pub fn from_cloud(cloud: &PointCloud) -> Self {
        let n = cloud.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = cloud.distance(i, j);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Self { n, dist }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// The induced metric on `indices` (duplicates give zero-distance pairs).
    pub fn select(&self, indices: &[usize]) -> FiniteMetricSpace {
        let k = indices.len();
        let mut dist = vec![0.0; k * k];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                dist[a * k + b] = self.distance(i, j);
            }
        }
        FiniteMetricSpace { n: k, dist }
    }
}

/// Either kind of input data.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Points(PointCloud),
    Metric(FiniteMetricSpace),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Points(c) => c.len(),
            Dataset::Metric(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match self {
            Dataset::Points(c) => c.distance(i, j),
            Dataset::Metric(m) => m.distance(i, j),
        }
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        match self {
            Dataset::Points(c) => Dataset::Points(c.select(indices)),
            Dataset::Metric(m) => Dataset::Metric(m.select(indices)),
        }
    }
}

impl From<PointCloud> for Dataset {
    fn from(c: PointCloud) -> Self {
        Dataset::Points(c)
    }
}

impl From<FiniteMetricSpace> for Dataset {
    fn from(m: FiniteMetricSpace) -> Self {
        Dataset::Metric(m)
    }
}

/// Parameters of the `(a, b, r0)`-standard assumption
/// `pi(B(x, r)) >= min(1, a r^b)` for all `r > r0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StandardAssumptionParams {
    pub a: f64,
    pub b: f64,
    pub r0: f64,
}

impl StandardAssumptionParams {
    pub fn new(a: f64, b: f64, r0: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return arg("a must be positive");
        }
        if !(b > 0.0 && b.is_finite()) {
            return arg("b must be positive");
        }
        if !(r0 >= 0.0 && r0.is_finite()) {
            return arg("r0 must be non-negative");
        }
        Ok(Self { a, b, r0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cloud_rejects_bad_shapes() {
        assert!(PointCloud::new(3, vec![1.0, 2.0]).is_err());
        assert!(PointCloud::new(0, vec![]).is_err());
        assert!(PointCloud::new(1, vec![f64::NAN]).is_err());
        assert!(PointCloud::from_points(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn metric_validation() {
        assert!(FiniteMetricSpace::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert!(FiniteMetricSpace::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(FiniteMetricSpace::from_rows(&[vec![1.0]]).is_err());
        assert!(FiniteMetricSpace::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
    }

    #[test]
    fn select_induces_submatrix() {
        let c = PointCloud::from_points(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let m = FiniteMetricSpace::from_cloud(&c);
        let s = m.select(&[2, 0, 2]);
        assert_eq!(s.distance(0, 1), 3.0);
        assert_eq!(s.distance(0, 2), 0.0);
        assert_eq!(Dataset::from(c).select(&[1, 2]).distance(0, 1), 2.0);
    }

    #[test]
    fn standard_assumption_validation() {
        assert!(StandardAssumptionParams::new(1.0, 2.0, 0.0).is_ok());
        assert!(StandardAssumptionParams::new(0.0, 2.0, 0.0).is_err());
        assert!(StandardAssumptionParams::new(1.0, -2.0, 0.0).is_err());
        assert!(StandardAssumptionParams::new(1.0, 2.0, -0.1).is_err());
    }
}
