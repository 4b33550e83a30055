use rayon::prelude::*;

use super::network_simplex::{network_simplex, FlowNetwork, FlowValue};
use super::{canonical_sum, cost_scale, slot_cost, Slot, TransportPlan};
use crate::error::{arg, Result};
use crate::measure::{check_exponents, Atom, PersistenceMeasure};

/// Optimal partial transport distance `OT_{p,q}` where the diagonal may
/// absorb or emit any amount of mass.
///
/// Measures with known denominators are solved exactly in integers after
/// scaling by the least common multiple; others are solved in floating point.
pub fn ot_distance(mu: &PersistenceMeasure, nu: &PersistenceMeasure, p: f64, q: f64) -> Result<(f64, TransportPlan)> {
    check_exponents(p, q)?;
    if mu.hom_dim != nu.hom_dim {
        return arg(format!("measures of dimensions {} and {}", mu.hom_dim, nu.hom_dim));
    }
    if swap_measures(mu, nu) {
        let (d, plan) = solve(nu, mu, p, q)?;
        let mut flows: Vec<_> = plan.flows.iter().map(|&(s, t, m)| (t, s, m)).collect();
        flows.sort_by_key(|x| (x.0, x.1));
        return Ok((d, TransportPlan { flows, cost: plan.cost }));
    }
    solve(mu, nu, p, q)
}

fn swap_measures(mu: &PersistenceMeasure, nu: &PersistenceMeasure) -> bool {
    let (a, b) = (mu.atoms(), nu.atoms());
    if a.len() != b.len() {
        return a.len() > b.len();
    }
    for (x, y) in a.iter().zip(b) {
        let c = x
            .birth
            .total_cmp(&y.birth)
            .then(x.death.total_cmp(&y.death))
            .then(x.mass.total_cmp(&y.mass));
        if c.is_ne() {
            return c.is_gt();
        }
    }
    mu.denominator() > nu.denominator()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Integer masses over a common denominator, if both measures carry one and
/// nothing overflows.
fn integer_masses(mu: &PersistenceMeasure, nu: &PersistenceMeasure) -> Option<(Vec<i64>, Vec<i64>, u64)> {
    let (b1, b2) = (mu.denominator()?, nu.denominator()?);
    let l = (b1 / gcd(b1, b2)).checked_mul(b2)?;
    let scale = |m: &PersistenceMeasure, b: u64| -> Option<Vec<i64>> {
        let f = l / b;
        m.numerators()?
            .into_iter()
            .map(|x| i64::try_from(x.checked_mul(f)?).ok())
            .collect()
    };
    let (x, y) = (scale(mu, b1)?, scale(nu, b2)?);
    let total = x.iter().chain(&y).try_fold(0i64, |acc, &v| acc.checked_add(v))?;
    total.checked_mul(2)?;
    Some((x, y, l))
}

fn solve(mu: &PersistenceMeasure, nu: &PersistenceMeasure, p: f64, q: f64) -> Result<(f64, TransportPlan)> {
    let coords = |atoms: &[Atom]| atoms.iter().map(|a| (a.birth, a.death)).collect::<Vec<_>>();
    let (a, b) = (coords(mu.atoms()), coords(nu.atoms()));
    match integer_masses(mu, nu) {
        Some((x, y, l)) => {
            let (d, flows) = solve_with(&a, &b, x, y, p, q)?;
            let l = l as f64;
            finish(&a, &b, d, flows.into_iter().map(|(s, t, m)| (s, t, m as f64 / l)).collect(), p, q)
        }
        None => {
            let x = mu.atoms().iter().map(|a| a.mass).collect();
            let y = nu.atoms().iter().map(|a| a.mass).collect();
            let (d, flows) = solve_with(&a, &b, x, y, p, q)?;
            finish(&a, &b, d, flows, p, q)
        }
    }
}

type Flows<F> = Vec<(Slot, Slot, F)>;

/// Min-cost flow on atoms of `a`, atoms of `b`, and one diagonal node per
/// side. The diagonal of `a` emits `sum(y)`, the diagonal of `b` absorbs
/// `sum(x)`, and the arc between them is free.
fn solve_with<F: FlowValue + std::iter::Sum>(a: &[(f64, f64)], b: &[(f64, f64)], x: Vec<F>, y: Vec<F>, p: f64, q: f64) -> Result<(f64, Flows<F>)> {
    let (n1, n2) = (a.len(), b.len());
    let scale = cost_scale(a, b, p, q);
    let pw = |s: Slot, t: Slot| slot_cost(a, b, s, t, p, q, scale);

    let (sx, sy): (F, F) = (x.iter().copied().sum(), y.iter().copied().sum());
    let mut supply = x;
    supply.extend(y.into_iter().map(|v| F::ZERO - v));
    let (da, db) = (n1 + n2, n1 + n2 + 1);
    supply.push(sy);
    supply.push(F::ZERO - sx);
    let mut net = FlowNetwork::new(supply);

    let mut slots = Vec::new();
    let diag_b: Vec<f64> = (0..n2).map(|j| pw(Slot::Diagonal, Slot::Point(j))).collect();
    for i in 0..n1 {
        let ci = pw(Slot::Point(i), Slot::Diagonal);
        for j in 0..n2 {
            let c = pw(Slot::Point(i), Slot::Point(j));
            if c <= ci + diag_b[j] {
                net.add_arc(i, n1 + j, c);
                slots.push((Slot::Point(i), Slot::Point(j)));
            }
        }
        net.add_arc(i, db, ci);
        slots.push((Slot::Point(i), Slot::Diagonal));
    }
    for j in 0..n2 {
        net.add_arc(da, n1 + j, diag_b[j]);
        slots.push((Slot::Diagonal, Slot::Point(j)));
    }
    net.add_arc(da, db, 0.0);
    slots.push((Slot::Diagonal, Slot::Diagonal));

    let flow = network_simplex(&net)?;
    let mut out = Vec::new();
    for (k, f) in flow.into_iter().enumerate() {
        let (s, t) = slots[k];
        if f > F::ZERO && (s, t) != (Slot::Diagonal, Slot::Diagonal) {
            out.push((s, t, f));
        }
    }
    out.sort_by_key(|x| (x.0, x.1));
    Ok((scale, out))
}

fn finish(a: &[(f64, f64)], b: &[(f64, f64)], scale: f64, flows: Flows<f64>, p: f64, q: f64) -> Result<(f64, TransportPlan)> {
    let terms = flows
        .iter()
        .map(|&(s, t, m)| m * slot_cost(a, b, s, t, p, q, scale))
        .collect();
    let d = scale * canonical_sum(terms).powf(1.0 / p);
    Ok((d, TransportPlan { flows, cost: d }))
}

/// Symmetric matrix of pairwise `OT_{p,q}` distances, computed in parallel
/// over the upper triangle.
pub fn pairwise_ot_matrix(measures: &[PersistenceMeasure], p: f64, q: f64) -> Result<Vec<Vec<f64>>> {
    check_exponents(p, q)?;
    if let Some(first) = measures.first() {
        if measures.iter().any(|m| m.hom_dim != first.hom_dim) {
            return arg("all measures must share one homology dimension");
        }
    }
    let n = measures.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| ot_distance(&measures[i], &measures[j], p, q).map(|r| r.0))
        .collect::<Result<_>>()?;
    let mut m = vec![vec![0.0; n]; n];
    for (&(i, j), &v) in cells.iter().zip(&values) {
        m[i][j] = v;
        m[j][i] = v;
    }
    Ok(m)
}
