//! Point-cloud and distance-matrix files.
//!
//! * point CSV: one point per line, comma-separated floats, `#` comments;
//! * distance CSV: `N` lines of `N` floats, symmetric with zero diagonal;
//! * binary: magic `PCF1`, little-endian `u64` N, `u64` m, then `N*m` `f64`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{FiniteMetricSpace, PointCloud};
use crate::error::{parse_err, Result};
use crate::fmt::g17;

const MAGIC: &[u8; 4] = b"PCF1";

/// Data rows of a CSV file paired with their 1-based line numbers.
fn csv_rows(text: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let field = field.trim();
            let value: f64 = match field.parse() {
                Ok(v) => v,
                Err(_) => return parse_err(i + 1, format!("`{field}` is not a number")),
            };
            if !value.is_finite() {
                return parse_err(i + 1, format!("non-finite value `{field}`"));
            }
            row.push(value);
        }
        rows.push((i + 1, row));
    }
    Ok(rows)
}

pub fn parse_point_csv(text: &str) -> Result<PointCloud> {
    let rows = csv_rows(text)?;
    let Some((_, first)) = rows.first() else {
        return parse_err(1, "no points in file");
    };
    let dim = first.len();
    let mut coords = Vec::with_capacity(rows.len() * dim);
    for (line, row) in &rows {
        if row.len() != dim {
            return parse_err(*line, format!("expected {dim} columns, found {}", row.len()));
        }
        coords.extend_from_slice(row);
    }
    Ok(PointCloud::new(dim, coords).expect("validated rows"))
}

pub fn parse_distance_csv(text: &str) -> Result<FiniteMetricSpace> {
    let rows = csv_rows(text)?;
    let n = rows.len();
    if n == 0 {
        return parse_err(1, "empty distance matrix");
    }
    for (i, (line, row)) in rows.iter().enumerate() {
        if row.len() != n {
            return parse_err(*line, format!("expected {n} columns, found {}", row.len()));
        }
        if row[i] != 0.0 {
            return parse_err(*line, format!("diagonal entry {} is not zero", row[i]));
        }
        if let Some(j) = row.iter().position(|&d| d < 0.0) {
            return parse_err(*line, format!("negative distance in column {}", j + 1));
        }
        for (j, (_, other)) in rows.iter().enumerate().take(i) {
            if other[i] != row[j] {
                return parse_err(
                    *line,
                    format!("matrix is not symmetric: entry ({i},{j}) differs from ({j},{i})"),
                );
            }
        }
    }
    let dist = rows.into_iter().flat_map(|(_, r)| r).collect();
    Ok(FiniteMetricSpace::new(n, dist).expect("validated rows"))
}

/// Decodes the `PCF1` binary format. Errors report line 1 (the format has no lines).
pub fn parse_binary(bytes: &[u8]) -> Result<PointCloud> {
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return parse_err(1, "missing PCF1 header");
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let m = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    if n == 0 || m == 0 {
        return parse_err(1, "point count and dimension must be positive");
    }
    let expected = n
        .checked_mul(m)
        .and_then(|k| k.checked_mul(8))
        .and_then(|k| k.checked_add(20));
    if expected != Some(bytes.len() as u64) {
        return parse_err(1, format!("payload size does not match {n} x {m} doubles"));
    }
    let coords: Vec<f64> = bytes[20..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if coords.iter().any(|c| !c.is_finite()) {
        return parse_err(1, "non-finite coordinate");
    }
    Ok(PointCloud::new(m as usize, coords).expect("validated payload"))
}

pub fn write_point_csv<W: Write>(cloud: &PointCloud, mut out: W) -> Result<()> {
    for p in cloud.points() {
        let line: Vec<String> = p.iter().map(|&x| g17(x)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_distance_csv<W: Write>(n: usize, entry: impl Fn(usize, usize) -> f64, mut out: W) -> Result<()> {
    for i in 0..n {
        let line: Vec<String> = (0..n).map(|j| g17(entry(i, j))).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

fn encode_binary(cloud: &PointCloud) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(20 + 8 * cloud.coords().len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(cloud.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&(cloud.dim() as u64).to_le_bytes());
    for c in cloud.coords() {
        bytes.extend_from_slice(&c.to_le_bytes());
    }
    bytes
}

pub fn load_point_csv(path: impl AsRef<Path>) -> Result<PointCloud> {
    parse_point_csv(&fs::read_to_string(path)?)
}

pub fn load_distance_csv(path: impl AsRef<Path>) -> Result<FiniteMetricSpace> {
    parse_distance_csv(&fs::read_to_string(path)?)
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<PointCloud> {
    parse_binary(&fs::read(path)?)
}

pub fn save_point_csv(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_point_csv(cloud, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn save_distance_csv(space: &FiniteMetricSpace, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_distance_csv(space.len(), |i, j| space.distance(i, j), &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_binary<W: Write>(cloud: &PointCloud, mut out: W) -> Result<()> {
    out.write_all(&encode_binary(cloud))?;
    Ok(())
}

pub fn save_binary(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_binary(cloud))?;
    Ok(())
}
