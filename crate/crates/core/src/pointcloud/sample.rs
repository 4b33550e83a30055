use std::f64::consts::TAU;

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{FiniteMetricSpace, PointCloud};
use crate::error::{arg, Result};
use crate::rng::rng;

/// `n` points on the torus in `R^3` with tube centre radius `outer_radius`
/// and tube radius `inner_radius`. Both angles are drawn uniformly.
pub fn sample_torus(n: usize, outer_radius: f64, inner_radius: f64, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return arg("torus sample size must be positive");
    }
    if !(inner_radius > 0.0 && inner_radius < outer_radius && outer_radius.is_finite()) {
        return arg("torus radii must satisfy 0 < inner < outer");
    }
    let mut r = rng(seed);
    let mut coords = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let theta = r.random::<f64>() * TAU;
        let phi = r.random::<f64>() * TAU;
        let ring = outer_radius + inner_radius * phi.cos();
        coords.extend_from_slice(&[ring * theta.cos(), ring * theta.sin(), inner_radius * phi.sin()]);
    }
    PointCloud::new(3, coords)
}

/// `n` points uniform on the sphere `S^{ambient_dim - 1}` of the given radius,
/// drawn by normalising standard Gaussian vectors.
pub fn sample_sphere(n: usize, radius: f64, ambient_dim: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return arg("sphere sample size must be positive");
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return arg("sphere radius must be positive");
    }
    if ambient_dim < 2 {
        return arg("sphere ambient dimension must be at least 2");
    }
    let mut r = rng(seed);
    let mut coords = Vec::with_capacity(ambient_dim * n);
    let mut v = vec![0.0; ambient_dim];
    for _ in 0..n {
        let norm = loop {
            for x in v.iter_mut() {
                *x = StandardNormal.sample(&mut r);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break norm;
            }
        };
        coords.extend(v.iter().map(|x| x / norm * radius));
    }
    PointCloud::new(ambient_dim, coords)
}

/// `n` points uniform (by area) on the planar annulus `inner <= |p| <= outer`.
pub fn sample_annulus(n: usize, outer_radius: f64, inner_radius: f64, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return arg("annulus sample size must be positive");
    }
    if !(inner_radius > 0.0 && inner_radius < outer_radius && outer_radius.is_finite()) {
        return arg("annulus radii must satisfy 0 < inner < outer");
    }
    let (lo, hi) = (inner_radius * inner_radius, outer_radius * outer_radius);
    let mut r = rng(seed);
    let mut coords = Vec::with_capacity(2 * n);
    while coords.len() < 2 * n {
        let rho = (lo + r.random::<f64>() * (hi - lo)).sqrt();
        let theta = r.random::<f64>() * TAU;
        let (x, y) = (rho * theta.cos(), rho * theta.sin());
        let norm = (x * x + y * y).sqrt();
        // rounding can leave the band by an ulp; resample instead of clamping
        if norm >= inner_radius && norm <= outer_radius {
            coords.push(x);
            coords.push(y);
        }
    }
    PointCloud::new(2, coords)
}

/// Draws `n` indices from `0..len`.
///
/// With replacement the indices are i.i.d. uniform; without, they are a
/// uniformly random `n`-subset in random order.
pub fn subsample(len: usize, n: usize, seed: u64, with_replacement: bool) -> Result<Vec<usize>> {
    if n == 0 {
        return arg("subsample size must be at least 1");
    }
    if len == 0 {
        return arg("cannot subsample an empty dataset");
    }
    let mut r = rng(seed);
    if with_replacement {
        Ok((0..n).map(|_| r.random_range(0..len)).collect())
    } else {
        if n > len {
            return arg(format!("cannot draw {n} of {len} points without replacement"));
        }
        Ok(rand::seq::index::sample(&mut r, len, n).into_vec())
    }
}

/// Adds independent `N(0, sigma)` noise to every coordinate.
pub fn perturb(cloud: &PointCloud, sigma: f64, seed: u64) -> Result<PointCloud> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return arg("noise level must be non-negative");
    }
    if sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| crate::Error::Argument(e.to_string()))?;
    let mut r = rng(seed);
    let coords = cloud.coords().iter().map(|c| c + normal.sample(&mut r)).collect();
    PointCloud::new(cloud.dim(), coords)
}

/// Adds `N(0, sigma)` noise to the upper triangle, mirrors it, and clamps at 0.
pub fn perturb_metric(space: &FiniteMetricSpace, sigma: f64, seed: u64) -> Result<FiniteMetricSpace> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return arg("noise level must be non-negative");
    }
    if sigma == 0.0 {
        return Ok(space.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| crate::Error::Argument(e.to_string()))?;
    let mut r = rng(seed);
    let n = space.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (space.distance(i, j) + normal.sample(&mut r)).max(0.0);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    FiniteMetricSpace::new(n, dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_points_satisfy_implicit_equation() {
        let c = sample_torus(4, 0.8, 0.3, 7).unwrap();
        assert_eq!(c.len(), 4);
        for p in c.points() {
            let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let lhs = (rho - 0.8).powi(2) + p[2] * p[2];
            assert!((lhs - 0.09).abs() < 1e-12);
        }
    }

    #[test]
    fn torus_is_deterministic_and_validates() {
        let a = sample_torus(100, 0.8, 0.3, 11).unwrap();
        let b = sample_torus(100, 0.8, 0.3, 11).unwrap();
        assert!(a.coords().iter().zip(b.coords()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, sample_torus(100, 0.8, 0.3, 12).unwrap());
        assert!(sample_torus(0, 0.8, 0.3, 1).is_err());
        assert!(sample_torus(5, 0.3, 0.8, 1).is_err());
        assert!(sample_torus(5, 0.8, 0.0, 1).is_err());
    }

    #[test]
    fn torus_at_experiment_scale() {
        let c = sample_torus(50_000, 0.8, 0.3, 2022).unwrap();
        assert_eq!((c.len(), c.dim()), (50_000, 3));
    }

    #[test]
    fn sphere_points_have_the_requested_norm() {
        let c = sample_sphere(3, 0.5, 4, 5).unwrap();
        for p in c.points() {
            let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 0.5).abs() < 1e-12);
        }
        let one = sample_sphere(1, 1.0, 2, 9).unwrap();
        let p = one.point(0);
        assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-12);
        let big = sample_sphere(20_000, 0.5, 4, 3).unwrap();
        assert_eq!((big.len(), big.dim()), (20_000, 4));
        assert!(sample_sphere(3, 0.0, 4, 1).is_err());
        assert!(sample_sphere(3, 1.0, 1, 1).is_err());
    }

    #[test]
    fn annulus_points_stay_in_band() {
        let c = sample_annulus(5000, 0.5, 0.2, 1).unwrap();
        assert_eq!(c.len(), 5000);
        for p in c.points() {
            let norm = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((0.2..=0.5).contains(&norm));
        }
        assert_eq!(c, sample_annulus(5000, 0.5, 0.2, 1).unwrap());
        assert!(sample_annulus(10, 0.2, 0.5, 1).is_err());
    }

    #[test]
    fn subsample_without_replacement_is_a_permutation() {
        let mut idx = subsample(10, 10, 3, false).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
        assert!(subsample(10, 0, 3, false).is_err());
        assert!(subsample(10, 11, 3, false).is_err());
    }

    #[test]
    fn subsample_with_replacement_allows_duplicates() {
        let idx = subsample(5000, 200, 3, true).unwrap();
        assert_eq!(idx.len(), 200);
        assert!(idx.iter().all(|&i| i < 5000));
        let small = subsample(3, 50, 1, true).unwrap();
        assert_eq!(small.len(), 50);
        assert_eq!(subsample(5000, 200, 3, true).unwrap(), idx);
    }

    #[test]
    fn perturb_identity_and_symmetry() {
        let c = sample_annulus(50, 0.5, 0.2, 2).unwrap();
        assert_eq!(perturb(&c, 0.0, 9).unwrap(), c);
        let noisy = perturb(&c, 0.01, 9).unwrap();
        assert_ne!(noisy, c);
        assert!(perturb(&c, -1.0, 9).is_err());

        let m = FiniteMetricSpace::from_cloud(&c);
        assert_eq!(perturb_metric(&m, 0.0, 4).unwrap(), m);
        let pm = perturb_metric(&m, 0.05, 4).unwrap();
        for i in 0..pm.len() {
            assert_eq!(pm.distance(i, i), 0.0);
            for j in 0..pm.len() {
                assert_eq!(pm.distance(i, j), pm.distance(j, i));
                assert!(pm.distance(i, j) >= 0.0);
            }
        }
    }
}
