use statrs::function::gamma::gamma;

use crate::error::{arg, Result};
use crate::pointcloud::StandardAssumptionParams;

/// Upper bound on `E[H_p^p(S_n, X)]` for `n`-point subsamples of an
/// `N`-point set satisfying the `(a, b, r0)`-standard assumption.
///
/// With `beta = p/b - 1`: for `p > b` the bound is
/// `2^p N r0^p + 2^(p+b) p N Gamma(beta) / (b a^beta) n^(-beta)`; for `p <= b`
/// it is `2^p N r0^p + p r_n 1{r_n > 2 r0 N^(1/p)}
/// + 2^(p+b) p N / (b a^beta) (log n / n)^(p/b) / (log n)^2` with
/// `r_n = 2 N^(1/p) / a^(1/b) (log n / n)^(1/b)`.
pub fn bias_bound(params: &StandardAssumptionParams, p: f64, n: usize, big_n: usize) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return arg("p must be finite and at least 1");
    }
    if n == 0 || big_n == 0 {
        return arg("sample sizes must be positive");
    }
    let StandardAssumptionParams { a, b, r0 } = *params;
    let (nf, bn) = (n as f64, big_n as f64);
    let beta = p / b - 1.0;
    let first = 2f64.powf(p) * bn * r0.powf(p);
    if p > b {
        return Ok(first + 2f64.powf(p + b) * p * bn * gamma(beta) / (b * a.powf(beta)) * nf.powf(-beta));
    }
    if n <= 1 {
        return arg("the p <= b bound needs n >= 2");
    }
    let ln = nf.ln();
    let rn = 2.0 * bn.powf(1.0 / p) / a.powf(1.0 / b) * (ln / nf).powf(1.0 / b);
    let indicator = if rn > 2.0 * r0 * bn.powf(1.0 / p) { 1.0 } else { 0.0 };
    let last = 2f64.powf(p + b) * p * bn / (b * a.powf(beta)) * (ln / nf).powf(p / b) / (ln * ln);
    Ok(first + p * rn * indicator + last)
}

/// Bound on `P(H_p(S_n, X) > r)`:
/// `4^b N^(b/p) / (a r^b) exp(-a r^b n / (2^b N^(b/p)))`, clamped to `[0, 1]`.
/// Requires `r > 2 r0 N^(1/p)`.
pub fn hausdorff_tail_bound(params: &StandardAssumptionParams, p: f64, n: usize, big_n: usize, r: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return arg("p must be finite and at least 1");
    }
    if n == 0 || big_n == 0 {
        return arg("sample sizes must be positive");
    }
    let StandardAssumptionParams { a, b, r0 } = *params;
    let bn = big_n as f64;
    let floor = 2.0 * r0 * bn.powf(1.0 / p);
    if !(r > floor && r.is_finite()) {
        return arg(format!("r must exceed 2 r0 N^(1/p) = {floor}"));
    }
    let nb = bn.powf(b / p);
    let value = 4f64.powf(b) * nb / (a * r.powf(b)) * (-a * r.powf(b) * n as f64 / (2f64.powf(b) * nb)).exp();
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, r0: f64) -> StandardAssumptionParams {
        StandardAssumptionParams::new(a, b, r0).unwrap()
    }

    #[test]
    fn bias_examples() {
        let v = bias_bound(&params(1.0, 1.0, 0.0), 2.0, 10, 1).unwrap();
        assert!((v - 1.6).abs() < 1e-12, "{v}");
        // r0 = 0 leaves only the n-term; doubling n divides it by 2^beta
        let pr = params(1.5, 2.0, 0.0);
        let (x, y) = (bias_bound(&pr, 3.0, 100, 50).unwrap(), bias_bound(&pr, 3.0, 200, 50).unwrap());
        assert!((x / y - 2f64.powf(0.5)).abs() < 1e-12);
        assert!(bias_bound(&pr, 2.0, 1, 50).is_err());
        assert!(bias_bound(&pr, 2.0, 2, 50).is_ok());
    }

    #[test]
    fn tail_example() {
        let v = hausdorff_tail_bound(&params(1.0, 1.0, 0.0), 1.0, 1, 1, 2.0).unwrap();
        assert!((v - 2.0 * (-1f64).exp()).abs() < 1e-15);
        assert!(hausdorff_tail_bound(&params(1.0, 1.0, 0.1), 1.0, 1, 1, 0.2).is_err());
        assert!(hausdorff_tail_bound(&params(1.0, 1.0, 0.0), 1.0, 1, 1, 0.0).is_err());
    }

    #[test]
    fn bounds_decrease_in_n() {
        for &(a, b, r0) in &[(1.0, 1.0, 0.0), (0.5, 2.0, 0.01), (2.0, 3.0, 0.0), (1.0, 2.0, 0.2)] {
            let pr = params(a, b, r0);
            for &p in &[1.0, 2.0, 3.0, 4.0] {
                let mut last = f64::INFINITY;
                for n in 3..400 {
                    let v = bias_bound(&pr, p, n, 100).unwrap();
                    assert!(v <= last * (1.0 + 1e-12), "a={a} b={b} r0={r0} p={p} n={n}");
                    last = v;
                }
                let r = 2.0 * r0 * 100f64.powf(1.0 / p) + 0.5;
                let mut last = f64::INFINITY;
                for n in 1..400 {
                    let v = hausdorff_tail_bound(&pr, p, n, 100, r).unwrap();
                    assert!(v <= last);
                    last = v;
                }
            }
        }
    }
}
