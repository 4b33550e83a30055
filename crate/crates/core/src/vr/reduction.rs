//! Boundary-matrix reduction over Z/2 for explicit filtrations.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::{FilteredSimplex, PersistenceDiagram};
use crate::error::{Error, Result};

/// Sparse Z/2 column: sorted row indices.
type Column = Vec<usize>;

fn xor_into(target: &mut Column, other: &[usize]) {
    let mut out = Vec::with_capacity(target.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < other.len() {
        match target[i].cmp(&other[j]) {
            Ordering::Less => {
                out.push(target[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(other[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&target[i..]);
    out.extend_from_slice(&other[j..]);
    *target = out;
}

/// Boundary columns of the simplices of dimension `<= max_hom_dim + 1`,
/// checking that the input is sorted and closed under faces.
fn boundary_matrix(filtration: &[FilteredSimplex], max_hom_dim: usize) -> Result<Vec<Option<Column>>> {
    for w in filtration.windows(2) {
        if w[0].filtration_cmp(&w[1]) != Ordering::Less {
            return Err(Error::Contract(format!(
                "filtration is not strictly sorted at simplex {:?}",
                w[1].vertices
            )));
        }
    }
    let mut index: HashMap<&[usize], usize> = HashMap::with_capacity(filtration.len());
    let mut columns = Vec::with_capacity(filtration.len());
    for (j, s) in filtration.iter().enumerate() {
        if s.vertices.is_empty() || s.vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract(format!("simplex {:?} has unsorted or repeated vertices", s.vertices)));
        }
        if s.dim() > max_hom_dim + 1 {
            columns.push(None);
            continue;
        }
        let mut col = Vec::with_capacity(s.vertices.len());
        if s.dim() > 0 {
            let mut face = Vec::with_capacity(s.dim());
            for skip in 0..s.vertices.len() {
                face.clear();
                face.extend(s.vertices.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v));
                match index.get(face.as_slice()) {
                    Some(&i) if filtration[i].filtration_value <= s.filtration_value => col.push(i),
                    _ => {
                        return Err(Error::Contract(format!(
                            "face {face:?} of {:?} is missing or enters later",
                            s.vertices
                        )))
                    }
                }
            }
            col.sort_unstable();
        }
        index.insert(&s.vertices, j);
        columns.push(Some(col));
    }
    Ok(columns)
}

fn collect_diagrams(
    filtration: &[FilteredSimplex],
    max_hom_dim: usize,
    pairs: &[(usize, usize)],
    essential: &[usize],
) -> Vec<PersistenceDiagram> {
    let mut finite: Vec<Vec<(f64, f64)>> = vec![Vec::new(); max_hom_dim + 1];
    let mut inf: Vec<Vec<f64>> = vec![Vec::new(); max_hom_dim + 1];
    for &(birth, death) in pairs {
        let dim = filtration[birth].dim();
        if dim <= max_hom_dim {
            finite[dim].push((filtration[birth].filtration_value, filtration[death].filtration_value));
        }
    }
    for &s in essential {
        inf[filtration[s].dim()].push(filtration[s].filtration_value);
    }
    finite
        .into_iter()
        .zip(inf)
        .enumerate()
        .map(|(dim, (f, e))| PersistenceDiagram::from_pairs(dim, f, e).expect("filtration values are ordered"))
        .collect()
}

/// Persistence diagrams in dimensions `0..=max_hom_dim` by column reduction
/// with the twist (clearing) optimisation: dimensions are reduced top-down and
/// every pivot row found in dimension `d + 1` zeroes the matching column of
/// dimension `d` without reducing it.
pub fn compute_persistence(filtration: &[FilteredSimplex], max_hom_dim: usize) -> Result<Vec<PersistenceDiagram>> {
    let mut columns = boundary_matrix(filtration, max_hom_dim)?;
    let n = filtration.len();
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut pairs = Vec::new();

    for dim in (1..=max_hom_dim + 1).rev() {
        for j in 0..n {
            if filtration[j].dim() != dim || cleared[j] {
                continue;
            }
            let mut col = columns[j].take().expect("column present");
            while let Some(&low) = col.last() {
                match pivot_owner[low] {
                    Some(k) => xor_into(&mut col, columns[k].as_ref().expect("reduced column kept")),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_owner[low] = Some(j);
                cleared[low] = true;
                pairs.push((low, j));
            }
            columns[j] = Some(col);
        }
    }

    let essential: Vec<usize> = (0..n)
        .filter(|&i| {
            filtration[i].dim() <= max_hom_dim
                && !cleared[i]
                && pivot_owner[i].is_none()
                && columns[i].as_ref().is_some_and(|c| c.is_empty())
        })
        .collect();
    Ok(collect_diagrams(filtration, max_hom_dim, &pairs, &essential))
}

/// Textbook left-to-right reduction with no optimisations. Test oracle for
/// [`compute_persistence`]; quadratic memory, intended for small inputs.
pub fn naive_reduction_oracle(filtration: &[FilteredSimplex], max_hom_dim: usize) -> Result<Vec<PersistenceDiagram>> {
    let mut columns = boundary_matrix(filtration, max_hom_dim)?;
    let n = filtration.len();
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut pairs = Vec::new();
    for j in 0..n {
        let Some(mut col) = columns[j].take() else { continue };
        while let Some(&low) = col.last() {
            let Some(k) = (0..j).find(|&k| columns[k].as_ref().and_then(|c| c.last()) == Some(&low)) else {
                break;
            };
            xor_into(&mut col, columns[k].as_ref().unwrap());
        }
        if let Some(&low) = col.last() {
            pivot_owner[low] = Some(j);
            pairs.push((low, j));
        }
        columns[j] = Some(col);
    }
    let essential: Vec<usize> = (0..n)
        .filter(|&i| {
            filtration[i].dim() <= max_hom_dim
                && pivot_owner[i].is_none()
                && columns[i].as_ref().is_some_and(|c| c.is_empty())
        })
        .collect();
    Ok(collect_diagrams(filtration, max_hom_dim, &pairs, &essential))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::{FiniteMetricSpace, PointCloud};
    use crate::vr::build_vr_filtration;

    fn square() -> FiniteMetricSpace {
        let c = PointCloud::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        FiniteMetricSpace::from_cloud(&c)
    }

    #[test]
    fn single_point() {
        let m = FiniteMetricSpace::from_rows(&[vec![0.0]]).unwrap();
        let f = build_vr_filtration(&m, 1, Some(1.0)).unwrap();
        for d in [compute_persistence(&f, 1).unwrap(), naive_reduction_oracle(&f, 1).unwrap()] {
            assert_eq!(d[0].essential(), &[0.0]);
            assert!(d[0].is_empty() && d[1].is_empty());
        }
    }

    #[test]
    fn unit_square() {
        let f = build_vr_filtration(&square(), 1, None).unwrap();
        let fast = compute_persistence(&f, 1).unwrap();
        assert_eq!(fast, naive_reduction_oracle(&f, 1).unwrap());
        assert_eq!(fast[1].expanded(), vec![(1.0, 2f64.sqrt())]);
        assert_eq!(fast[0].expanded(), vec![(0.0, 1.0); 3]);
        assert_eq!(fast[0].essential(), &[0.0]);
    }

    #[test]
    fn equilateral_triangle_has_no_loop() {
        let s = 0.25;
        let m = FiniteMetricSpace::from_rows(&[vec![0.0, s, s], vec![s, 0.0, s], vec![s, s, 0.0]]).unwrap();
        let f = build_vr_filtration(&m, 1, None).unwrap();
        let d = compute_persistence(&f, 1).unwrap();
        assert_eq!(d, naive_reduction_oracle(&f, 1).unwrap());
        assert_eq!(d[0].expanded(), vec![(0.0, s), (0.0, s)]);
        assert!(d[1].is_empty());
    }

    #[test]
    fn contract_violations_are_reported() {
        let mut f = build_vr_filtration(&square(), 1, None).unwrap();
        f.swap(0, 5);
        assert!(matches!(compute_persistence(&f, 1), Err(Error::Contract(_))));
        let mut f = build_vr_filtration(&square(), 1, None).unwrap();
        f.remove(0);
        assert!(matches!(naive_reduction_oracle(&f, 1), Err(Error::Contract(_))));
    }
}
