//! Rectangular linear assignment by shortest augmenting paths.

use crate::error::{arg, Result};

/// Minimum-cost assignment of every row of an `rows × cols` cost matrix
/// (row-major, `rows ≤ cols`) to a distinct column. Entries equal to
/// `f64::INFINITY` are forbidden. Returns the column of each row.
///
/// Rows are inserted one at a time, each by a Dijkstra search over reduced
/// costs; ties go to the lowest column index, preferring free columns.
pub fn solve_assignment(cost: &[f64], rows: usize, cols: usize) -> Result<Vec<usize>> {
    if cost.len() != rows * cols {
        return arg(format!("cost matrix has {} entries, expected {rows}×{cols}", cost.len()));
    }
    if rows > cols {
        return arg("assignment needs at least as many columns as rows");
    }
    if cost.iter().any(|c| c.is_nan() || *c == f64::NEG_INFINITY) {
        return arg("assignment costs must not be NaN or -inf");
    }
    const NONE: usize = usize::MAX;
    let mut u = vec![0.0; rows];
    let mut v = vec![0.0; cols];
    let mut col4row = vec![NONE; rows];
    let mut row4col = vec![NONE; cols];
    let mut path = vec![NONE; cols];
    let mut dist = vec![f64::INFINITY; cols];
    let mut seen_row = vec![false; rows];
    let mut seen_col = vec![false; cols];
    let mut remaining: Vec<usize> = Vec::with_capacity(cols);

    for cur in 0..rows {
        dist.fill(f64::INFINITY);
        seen_row.fill(false);
        seen_col.fill(false);
        remaining.clear();
        remaining.extend((0..cols).rev());

        let mut min_val = 0.0;
        let mut i = cur;
        let sink = loop {
            seen_row[i] = true;
            let mut best = NONE;
            let mut lowest = f64::INFINITY;
            for (pos, &j) in remaining.iter().enumerate() {
                let r = min_val + cost[i * cols + j] - u[i] - v[j];
                if r < dist[j] {
                    path[j] = i;
                    dist[j] = r;
                }
                if dist[j] < lowest || (dist[j] == lowest && row4col[j] == NONE) {
                    lowest = dist[j];
                    best = pos;
                }
            }
            if best == NONE || lowest == f64::INFINITY {
                return arg("assignment problem is infeasible");
            }
            min_val = lowest;
            let j = remaining.swap_remove(best);
            seen_col[j] = true;
            if row4col[j] == NONE {
                break j;
            }
            i = row4col[j];
        };

        u[cur] += min_val;
        for r in 0..rows {
            if seen_row[r] && r != cur {
                u[r] += min_val - dist[col4row[r]];
            }
        }
        for c in 0..cols {
            if seen_col[c] {
                v[c] -= min_val - dist[c];
            }
        }
        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = r;
            std::mem::swap(&mut col4row[r], &mut j);
            if r == cur {
                break;
            }
        }
    }
    Ok(col4row)
}
