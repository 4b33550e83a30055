use crate::error::{arg, Result};

/// How the decay exponent is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitMode {
    /// Linear least squares with the exponent held fixed.
    Fixed(f64),
    /// Exponent searched over `[0.05, 3]`.
    Free,
}

/// Fitted model `loss(n) = a0 + a1 n^(-c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub a0: f64,
    pub a1: f64,
    pub c: f64,
    pub sse: f64,
    pub free: bool,
}

impl RateFit {
    pub fn model(&self) -> &'static str {
        if self.free {
            "free-exponent"
        } else {
            "fixed-exponent"
        }
    }

    pub fn predict(&self, n: f64) -> f64 {
        self.a0 + self.a1 * n.powf(-self.c)
    }
}

const C_RANGE: (f64, f64) = (0.05, 3.0);

/// Least-squares fit of `a0 + a1 n^(-c)` to `(n, loss)` points.
pub fn fit_rate(points: &[(f64, f64)], mode: FitMode) -> Result<RateFit> {
    if points.iter().any(|&(n, y)| !(n > 0.0 && n.is_finite() && y.is_finite())) {
        return arg("fit points need positive finite n and finite losses");
    }
    match mode {
        FitMode::Fixed(c) => {
            if points.len() < 3 {
                return arg("a fixed-exponent fit needs at least 3 points");
            }
            if !(c > 0.0 && c.is_finite()) {
                return arg("the exponent must be positive");
            }
            let (a0, a1, sse) = linear_fit(points, c)?;
            Ok(RateFit { a0, a1, c, sse, free: false })
        }
        FitMode::Free => {
            if points.len() < 4 {
                return arg("a free-exponent fit needs at least 4 points");
            }
            let sse = |c: f64| linear_fit(points, c).map(|r| r.2).unwrap_or(f64::INFINITY);
            // bracket the minimum on a coarse grid, then refine by golden section
            let steps = 120;
            let h = (C_RANGE.1 - C_RANGE.0) / steps as f64;
            let grid: Vec<f64> = (0..=steps).map(|i| C_RANGE.0 + i as f64 * h).collect();
            let best = (0..grid.len())
                .min_by(|&i, &j| sse(grid[i]).total_cmp(&sse(grid[j])).then(i.cmp(&j)))
                .expect("non-empty grid");
            let lo = grid[best.saturating_sub(1)];
            let hi = grid[(best + 1).min(steps)];
            let c = golden_section(sse, lo, hi, 1e-12);
            let (a0, a1, sse) = linear_fit(points, c)?;
            Ok(RateFit { a0, a1, c, sse, free: true })
        }
    }
}

/// Ordinary least squares of `y` on `n^(-c)`; returns `(a0, a1, sse)`.
fn linear_fit(points: &[(f64, f64)], c: f64) -> Result<(f64, f64, f64)> {
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n.powf(-c)).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, &(_, y)) in xs.iter().zip(points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) {
        return arg("fit needs at least two distinct n values");
    }
    let a1 = sxy / sxx;
    let a0 = my - a1 * mx;
    let sse = xs
        .iter()
        .zip(points)
        .map(|(x, &(_, y))| (y - a0 - a1 * x).powi(2))
        .sum();
    Ok((a0, a1, sse))
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}
