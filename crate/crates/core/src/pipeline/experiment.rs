use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::approx::{persistence_at, subsample_diagrams, PhOptions};
use super::fit::{fit_rate, FitMode, RateFit};
use crate::error::{arg, Error, Result};
use crate::fmt::g17;
use crate::means::mean_measure;
use crate::measure::{diagram_to_measure, PersistenceMeasure};
use crate::pointcloud::{
    load_binary, load_distance_csv, load_point_csv, sample_annulus, sample_sphere, sample_torus, Dataset,
};
use crate::rng::derive_seed;
use crate::transport::{ot_distance, pairwise_ot_matrix};
use crate::vr::PersistenceDiagram;

/// Where the data of an experiment comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Torus { points: usize, outer_radius: f64, inner_radius: f64, seed: u64 },
    Sphere { points: usize, radius: f64, ambient_dim: usize, seed: u64 },
    Annulus { points: usize, outer_radius: f64, inner_radius: f64, seed: u64 },
    PointCsv { path: PathBuf },
    DistanceCsv { path: PathBuf },
    Binary { path: PathBuf },
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Dataset> {
        Ok(match self {
            DatasetSpec::Torus { points, outer_radius, inner_radius, seed } => {
                sample_torus(*points, *outer_radius, *inner_radius, *seed)?.into()
            }
            DatasetSpec::Sphere { points, radius, ambient_dim, seed } => {
                sample_sphere(*points, *radius, *ambient_dim, *seed)?.into()
            }
            DatasetSpec::Annulus { points, outer_radius, inner_radius, seed } => {
                sample_annulus(*points, *outer_radius, *inner_radius, *seed)?.into()
            }
            DatasetSpec::PointCsv { path } => load_point_csv(path)?.into(),
            DatasetSpec::DistanceCsv { path } => load_distance_csv(path)?.into(),
            DatasetSpec::Binary { path } => load_binary(path)?.into(),
        })
    }

    /// Intrinsic dimension of a sampled manifold, the default `b`.
    pub fn intrinsic_dim(&self) -> Option<f64> {
        match self {
            DatasetSpec::Torus { .. } | DatasetSpec::Annulus { .. } => Some(2.0),
            DatasetSpec::Sphere { ambient_dim, .. } => Some(*ambient_dim as f64 - 1.0),
            _ => None,
        }
    }
}

/// Parses `torus:N:R:r[:seed]`, `sphere:N:radius:ambient_dim[:seed]`,
/// `annulus:N:outer:inner[:seed]`, `points:PATH`, `distances:PATH`,
/// `binary:PATH`, or a bare path (`.bin` is binary, anything else a point CSV).
impl FromStr for DatasetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .and_then(|t| t.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("bad dataset spec '{s}'")))
        };
        let int = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| Error::Config(format!("bad dataset spec '{s}'")))
        };
        let seed = || -> Result<u64> {
            match parts.get(4) {
                None => Ok(0),
                Some(t) => t.parse().map_err(|_| Error::Config(format!("bad seed in '{s}'"))),
            }
        };
        let sampler = |expected: usize| -> Result<()> {
            if parts.len() == expected || parts.len() == expected + 1 {
                Ok(())
            } else {
                Err(Error::Config(format!("bad dataset spec '{s}'")))
            }
        };
        let rest = || PathBuf::from(s.split_once(':').map(|x| x.1).unwrap_or(""));
        match parts[0] {
            "torus" => {
                sampler(4)?;
                Ok(DatasetSpec::Torus { points: int(1)?, outer_radius: num(2)?, inner_radius: num(3)?, seed: seed()? })
            }
            "sphere" => {
                sampler(4)?;
                Ok(DatasetSpec::Sphere { points: int(1)?, radius: num(2)?, ambient_dim: int(3)?, seed: seed()? })
            }
            "annulus" => {
                sampler(4)?;
                Ok(DatasetSpec::Annulus { points: int(1)?, outer_radius: num(2)?, inner_radius: num(3)?, seed: seed()? })
            }
            "points" => Ok(DatasetSpec::PointCsv { path: rest() }),
            "distances" => Ok(DatasetSpec::DistanceCsv { path: rest() }),
            "binary" => Ok(DatasetSpec::Binary { path: rest() }),
            _ if s.ends_with(".bin") => Ok(DatasetSpec::Binary { path: s.into() }),
            _ => Ok(DatasetSpec::PointCsv { path: s.into() }),
        }
    }
}

/// Number of subsamples for a given subsample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BRule {
    /// One value per entry of the n grid.
    List(Vec<usize>),
    /// `ceil(c n)`.
    Proportional(f64),
    /// `ceil(n^e)`.
    Power(f64),
}

/// Ceiling that ignores rounding noise, so `ceil(0.1 * 150)` is 15.
fn tolerant_ceil(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

impl BRule {
    pub fn count(&self, index: usize, n: usize) -> usize {
        match self {
            BRule::List(v) => v[index],
            BRule::Proportional(c) => tolerant_ceil(c * n as f64).max(1),
            BRule::Power(e) => tolerant_ceil((n as f64).powf(*e)).max(1),
        }
    }
}

/// Whether losses are reported as `OT_p^p` or `OT_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    Powered,
    Distance,
}

/// JSON has no infinity, so an infinite exponent is written as `"inf"`.
mod exponent {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &f64, s: S) -> Result<S::Ok, S::Error> {
        if q.is_infinite() && *q > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*q)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Number(q) => Ok(q),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

fn default_repeats() -> usize {
    5
}

fn default_reference_limit() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub p: f64,
    /// Ground norm exponent; `"inf"` in JSON for the max norm.
    #[serde(with = "exponent")]
    pub q: f64,
    pub hom_dim: usize,
    pub n_grid: Vec<usize>,
    pub b_rule: BRule,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub with_replacement: bool,
    #[serde(default)]
    pub min_persistence: f64,
    #[serde(default)]
    pub loss: LossKind,
    /// Diagram JSON of the full dataset; computed when absent.
    #[serde(default)]
    pub reference: Option<PathBuf>,
    /// Largest dataset whose reference diagram is computed directly.
    #[serde(default = "default_reference_limit")]
    pub reference_limit: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self, data_len: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return bad("p must be finite and at least 1".into());
        }
        if !(self.q >= 1.0) {
            return bad("q must be at least 1".into());
        }
        if self.n_grid.is_empty() {
            return bad("the n grid is empty".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("the n grid must be strictly increasing".into());
        }
        if self.n_grid[0] == 0 {
            return bad("subsample sizes must be positive".into());
        }
        if !self.with_replacement && *self.n_grid.last().expect("non-empty") > data_len {
            return bad(format!("n exceeds the {data_len} available points"));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if !(self.min_persistence >= 0.0) {
            return bad("min persistence must be non-negative".into());
        }
        match &self.b_rule {
            BRule::List(v) if v.len() != self.n_grid.len() => bad("B list and n grid differ in length".into()),
            BRule::List(v) if v.contains(&0) => bad("B must be at least 1".into()),
            BRule::Proportional(c) | BRule::Power(c) if !(*c > 0.0 && c.is_finite()) => {
                bad("B rule parameter must be positive".into())
            }
            _ => Ok(()),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn options(&self) -> PhOptions {
        PhOptions {
            min_persistence: self.min_persistence,
            with_replacement: self.with_replacement,
            ..PhOptions::new(self.hom_dim)
        }
    }
}

/// One subsampling run of a rate experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub b: usize,
    pub repeat: usize,
    pub seed: u64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub n: usize,
    pub b: usize,
    pub loss: f64,
    pub loss_std: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossCurve {
    pub rows: Vec<CurveRow>,
    pub runs: Vec<RateRow>,
}

impl LossCurve {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.n as f64, r.loss)).collect()
    }

    pub fn fit(&self, mode: FitMode) -> Result<RateFit> {
        fit_rate(&self.points(), mode)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,B,loss,loss_std,repeats")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.n, r.b, g17(r.loss), g17(r.loss_std), r.repeats)?;
        }
        Ok(())
    }
}

const HASH_PREFIX: &str = "# config-hash: ";
const RUN_HEADER: &str = "n,B,repeat,seed,loss";

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v.sqrt())
}

fn loss_value(mean: &PersistenceMeasure, reference: &PersistenceMeasure, p: f64, q: f64, kind: LossKind) -> Result<f64> {
    let d = ot_distance(mean, reference, p, q)?.0;
    Ok(match kind {
        LossKind::Powered => d.powf(p),
        LossKind::Distance => d,
    })
}

/// Reads completed runs from an existing run CSV, dropping a torn final line.
fn resume(path: &Path, hash: &str) -> Result<Vec<RateRow>> {
    let mut text = fs::read_to_string(path)?;
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if !text.ends_with('\n') {
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        text.truncate(keep);
        fs::write(path, &text)?;
    }
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    match header.strip_prefix(HASH_PREFIX) {
        Some(h) if h == hash => {}
        Some(_) => return Err(Error::Config(format!("{} was written by a different configuration", path.display()))),
        None => return Err(Error::Config(format!("{} lacks a config-hash header", path.display()))),
    }
    match lines.next() {
        Some(RUN_HEADER) | None => {}
        Some(_) => return Err(Error::Config(format!("{} has an unexpected column header", path.display()))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let parsed = (|| {
            if f.len() != 5 {
                return None;
            }
            Some(RateRow {
                n: f[0].parse().ok()?,
                b: f[1].parse().ok()?,
                repeat: f[2].parse().ok()?,
                seed: f[3].parse().ok()?,
                loss: f[4].parse().ok()?,
            })
        })();
        match parsed {
            Some(r) => rows.push(r),
            None => return Err(Error::Parse { line: k + 3, message: format!("bad run row '{line}'") }),
        }
    }
    Ok(rows)
}

/// Reference diagram named by the config, or computed from the full data.
pub fn reference_diagram(cfg: &ExperimentConfig, data: &Dataset) -> Result<PersistenceDiagram> {
    if let Some(path) = &cfg.reference {
        let d = PersistenceDiagram::from_json(&fs::read_to_string(path)?)?;
        if d.hom_dim != cfg.hom_dim {
            return Err(Error::Config(format!("reference diagram has dimension {}, expected {}", d.hom_dim, cfg.hom_dim)));
        }
        return Ok(d.filter_by_persistence(cfg.min_persistence));
    }
    if data.len() > cfg.reference_limit {
        return Err(Error::Config(format!(
            "the reference diagram of {} points exceeds the limit of {}; supply one from file",
            data.len(),
            cfg.reference_limit
        )));
    }
    persistence_at(data, &cfg.options())
}

/// Loss of the mean measure against the reference diagram over the n grid.
///
/// Run `r` at size `n` uses seed `derive_seed(derive_seed(seed, n), r)`.
/// With `csv`, every run is appended to that file under a config-hash
/// header as soon as its size finishes; runs already present are reused.
pub fn rate_experiment(cfg: &ExperimentConfig, csv: Option<&Path>) -> Result<LossCurve> {
    let data = cfg.dataset.load()?;
    rate_experiment_on(cfg, &data, csv)
}

/// [`rate_experiment`] on already loaded data.
pub fn rate_experiment_on(cfg: &ExperimentConfig, data: &Dataset, csv: Option<&Path>) -> Result<LossCurve> {
    cfg.validate(data.len())?;
    let hash = cfg.config_hash();
    let mut done: BTreeMap<(usize, usize), RateRow> = BTreeMap::new();
    let mut writer = None;
    if let Some(path) = csv {
        let existing = if path.exists() { resume(path, &hash)? } else { Vec::new() };
        let fresh = existing.is_empty() && fs::metadata(path).map_or(true, |m| m.len() == 0);
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            writeln!(file, "{HASH_PREFIX}{hash}")?;
            writeln!(file, "{RUN_HEADER}")?;
        }
        for r in existing {
            done.insert((r.n, r.repeat), r);
        }
        writer = Some(file);
    }

    let opts = cfg.options();
    let mut reference = None;
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let b = cfg.b_rule.count(i, n);
        let size_seed = derive_seed(cfg.seed, n as u64);
        let missing: Vec<usize> = (0..cfg.repeats).filter(|r| !done.contains_key(&(n, *r))).collect();
        if !missing.is_empty() && reference.is_none() {
            reference = Some(diagram_to_measure(&reference_diagram(cfg, data)?));
        }
        let fresh: Vec<RateRow> = missing
            .par_iter()
            .map(|&repeat| {
                let seed = derive_seed(size_seed, repeat as u64);
                let diagrams = subsample_diagrams(data, n, b, seed, &opts)?;
                let mean = mean_measure(&diagrams)?;
                let loss = loss_value(&mean, reference.as_ref().expect("reference computed"), cfg.p, cfg.q, cfg.loss)?;
                Ok(RateRow { n, b, repeat, seed, loss })
            })
            .collect::<Result<_>>()?;
        if let Some(file) = writer.as_mut() {
            for r in &fresh {
                writeln!(file, "{},{},{},{},{}", r.n, r.b, r.repeat, r.seed, g17(r.loss))?;
            }
            file.flush()?;
        }
        for r in fresh {
            done.insert((r.n, r.repeat), r);
        }
        let cell: Vec<RateRow> = (0..cfg.repeats).map(|r| done[&(n, r)].clone()).collect();
        if cell.iter().any(|r| r.b != b) {
            return Err(Error::Config(format!("stored runs at n = {n} used a different B")));
        }
        let losses: Vec<f64> = cell.iter().map(|r| r.loss).collect();
        let (loss, loss_std) = mean_std(&losses);
        rows.push(CurveRow { n, b, loss, loss_std, repeats: cfg.repeats });
        runs.extend(cell);
    }
    Ok(LossCurve { rows, runs })
}

/// Decay of the mean measure in the number of subsamples at fixed `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceCurve {
    /// `(B, OT loss against the proxy)`; the last row is 0 by construction.
    pub rows: Vec<(usize, f64)>,
    /// Fit of `a0 + a1 B^(-c)` over all rows but the proxy's own, when at
    /// least four remain.
    pub fit: Option<RateFit>,
}

/// Loss of nested means `D_B` (the first `B` subsamples) against the proxy
/// mean at the largest `B`, which stands in for the population mean.
pub fn variance_rate_check(
    data: &Dataset,
    opts: &PhOptions,
    p: f64,
    q: f64,
    kind: LossKind,
    n: usize,
    b_grid: &[usize],
    seed: u64,
) -> Result<VarianceCurve> {
    if b_grid.is_empty() || b_grid[0] == 0 || b_grid.windows(2).any(|w| w[0] >= w[1]) {
        return arg("the B grid must be strictly increasing and positive");
    }
    let max_b = *b_grid.last().expect("non-empty");
    let diagrams = subsample_diagrams(data, n, max_b, seed, opts)?;
    let proxy = mean_measure(&diagrams)?;
    let rows: Vec<(usize, f64)> = b_grid
        .par_iter()
        .map(|&b| Ok((b, loss_value(&mean_measure(&diagrams[..b])?, &proxy, p, q, kind)?)))
        .collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = rows[..rows.len() - 1].iter().map(|&(b, l)| (b as f64, l)).collect();
    let fit = if points.len() >= 4 { fit_rate(&points, FitMode::Free).ok() } else { None };
    Ok(VarianceCurve { rows, fit })
}

/// Subsample size for [`export_ot_matrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleSize {
    Count(usize),
    /// Fraction of each dataset, rounded up.
    Fraction(f64),
}

impl SampleSize {
    pub fn resolve(&self, len: usize) -> Result<usize> {
        match *self {
            SampleSize::Count(n) => Ok(n),
            SampleSize::Fraction(f) if f > 0.0 && f <= 1.0 => Ok(tolerant_ceil(f * len as f64).max(1)),
            SampleSize::Fraction(_) => arg("the subsample fraction must lie in (0, 1]"),
        }
    }
}

/// Pairwise `OT_p` distances between the mean measures of several datasets.
/// Every dataset is subsampled from the same master seed.
pub fn export_ot_matrix(
    datasets: &[Dataset],
    size: SampleSize,
    b: usize,
    seed: u64,
    opts: &PhOptions,
    p: f64,
    q: f64,
) -> Result<Vec<Vec<f64>>> {
    if datasets.len() < 2 {
        return arg("at least two datasets are needed");
    }
    let means: Vec<PersistenceMeasure> = datasets
        .iter()
        .map(|d| mean_measure(&subsample_diagrams(d, size.resolve(d.len())?, b, seed, opts)?))
        .collect::<Result<_>>()?;
    pairwise_ot_matrix(&means, p, q)
}

/// Writes the run CSV header and rows, as [`rate_experiment`] does.
pub fn write_runs_csv<W: Write>(hash: &str, runs: &[RateRow], mut out: W) -> Result<()> {
    writeln!(out, "{HASH_PREFIX}{hash}")?;
    writeln!(out, "{RUN_HEADER}")?;
    for r in runs {
        writeln!(out, "{},{},{},{},{}", r.n, r.b, r.repeat, r.seed, g17(r.loss))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::sample_annulus;

    fn annulus_cfg(points: usize) -> ExperimentConfig {
        ExperimentConfig {
            dataset: DatasetSpec::Annulus { points, outer_radius: 1.0, inner_radius: 0.5, seed: 3 },
            p: 2.0,
            q: 2.0,
            hom_dim: 1,
            n_grid: vec![20, 30, 40],
            b_rule: BRule::Proportional(0.1),
            repeats: 2,
            seed: 11,
            with_replacement: false,
            min_persistence: 0.0,
            loss: LossKind::Powered,
            reference: None,
            reference_limit: 1000,
        }
    }

    #[test]
    fn b_rules() {
        assert_eq!(BRule::Proportional(0.1).count(0, 150), 15);
        assert_eq!(BRule::Proportional(0.1).count(0, 155), 16);
        assert_eq!(BRule::Proportional(0.1).count(0, 5), 1);
        assert_eq!(BRule::Power(2.0 / 3.0).count(0, 1000), 100);
        assert_eq!(BRule::Power(0.5).count(0, 10), 4);
        assert_eq!(BRule::List(vec![3, 4]).count(1, 99), 4);
    }

    #[test]
    fn dataset_spec_strings() {
        assert_eq!(
            "torus:100:0.8:0.3:7".parse::<DatasetSpec>().unwrap(),
            DatasetSpec::Torus { points: 100, outer_radius: 0.8, inner_radius: 0.3, seed: 7 }
        );
        assert_eq!(
            "sphere:10:1:4".parse::<DatasetSpec>().unwrap(),
            DatasetSpec::Sphere { points: 10, radius: 1.0, ambient_dim: 4, seed: 0 }
        );
        assert_eq!("a/b.bin".parse::<DatasetSpec>().unwrap(), DatasetSpec::Binary { path: "a/b.bin".into() });
        assert_eq!("distances:x:y.csv".parse::<DatasetSpec>().unwrap(), DatasetSpec::DistanceCsv { path: "x:y.csv".into() });
        assert!("torus:100:0.8".parse::<DatasetSpec>().is_err());
        assert!("torus:x:0.8:0.3".parse::<DatasetSpec>().is_err());
    }

    #[test]
    fn config_validation_and_hash() {
        let cfg = annulus_cfg(100);
        assert!(cfg.validate(100).is_ok());
        let json = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.config_hash(), cfg.config_hash());
        assert_eq!(cfg.config_hash().len(), 64);
        let mut other = cfg.clone();
        other.seed += 1;
        assert_ne!(other.config_hash(), cfg.config_hash());
        for bad in [
            ExperimentConfig { n_grid: vec![30, 20], ..cfg.clone() },
            ExperimentConfig { n_grid: vec![20, 200], ..cfg.clone() },
            ExperimentConfig { repeats: 0, ..cfg.clone() },
            ExperimentConfig { b_rule: BRule::List(vec![1]), ..cfg.clone() },
            ExperimentConfig { p: 0.5, ..cfg.clone() },
        ] {
            assert!(matches!(bad.validate(100), Err(Error::Config(_))));
        }
        let minimal = r#"{"dataset": {"kind": "torus", "points": 50, "outer_radius": 0.8, "inner_radius": 0.3, "seed": 1},
            "p": 3, "q": 3, "hom_dim": 1, "n_grid": [10, 20], "b_rule": {"proportional": 0.1}}"#;
        let m = ExperimentConfig::from_json(minimal).unwrap();
        assert_eq!(m.repeats, 5);
        assert_eq!(m.loss, LossKind::Powered);
        let sup = ExperimentConfig { q: f64::INFINITY, ..cfg.clone() };
        let json = serde_json::to_string(&sup).unwrap();
        assert!(json.contains(r#""q":"inf""#));
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), sup);
        assert!(ExperimentConfig::from_json(&json.replace(r#""q":"inf""#, r#""q":"max""#)).is_err());
    }

    #[test]
    fn full_size_single_subsample_has_zero_loss() {
        let cfg = ExperimentConfig { n_grid: vec![80], b_rule: BRule::List(vec![1]), repeats: 3, ..annulus_cfg(80) };
        let curve = rate_experiment(&cfg, None).unwrap();
        assert_eq!(curve.rows.len(), 1);
        assert_eq!(curve.rows[0].loss, 0.0);
        assert!(curve.runs.iter().all(|r| r.loss == 0.0));
    }

    #[test]
    fn csv_is_resumable_and_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = annulus_cfg(120);
        let whole = dir.path().join("whole.csv");
        let curve = rate_experiment(&cfg, Some(&whole)).unwrap();
        let text = fs::read_to_string(&whole).unwrap();
        assert!(text.starts_with(&format!("{HASH_PREFIX}{}\n{RUN_HEADER}\n", cfg.config_hash())));
        assert_eq!(text.lines().count(), 2 + 3 * 2);

        // cut the file after the first size plus a torn line, then resume
        let lines: Vec<&str> = text.lines().collect();
        let partial = dir.path().join("partial.csv");
        fs::write(&partial, format!("{}\n{}", lines[..5].join("\n"), &lines[5][..4])).unwrap();
        let resumed = rate_experiment(&cfg, Some(&partial)).unwrap();
        assert_eq!(fs::read_to_string(&partial).unwrap(), text);
        assert_eq!(resumed, curve);

        // a rerun on a finished file computes nothing and changes nothing
        assert_eq!(rate_experiment(&cfg, Some(&whole)).unwrap(), curve);
        assert_eq!(fs::read_to_string(&whole).unwrap(), text);

        let other = ExperimentConfig { seed: 12, ..cfg };
        assert!(matches!(rate_experiment(&other, Some(&whole)), Err(Error::Config(_))));

        let mut buf = Vec::new();
        write_runs_csv(&other.config_hash(), &curve.runs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 8);
    }

    #[test]
    fn missing_reference_is_a_config_error() {
        let cfg = ExperimentConfig { reference_limit: 50, ..annulus_cfg(100) };
        assert!(matches!(rate_experiment(&cfg, None), Err(Error::Config(_))));
    }

    #[test]
    fn reference_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = annulus_cfg(100);
        let data = cfg.dataset.load().unwrap();
        let d = reference_diagram(&cfg, &data).unwrap();
        let path = dir.path().join("ref.json");
        fs::write(&path, d.to_json()).unwrap();
        let from_file = ExperimentConfig { reference: Some(path), reference_limit: 10, ..cfg.clone() };
        let a = rate_experiment(&cfg, None).unwrap();
        let b = rate_experiment(&from_file, None).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn bias_variance_inequality_holds_at_proxy_level() {
        // loss <= 2^(p-1) (variance + bias) with a large-B proxy for the population mean
        let data: Dataset = sample_annulus(150, 1.0, 0.5, 5).unwrap().into();
        let opts = PhOptions::new(1);
        let reference = diagram_to_measure(&persistence_at(&data, &opts).unwrap());
        for &p in &[1.0, 2.0, 3.0] {
            for (k, &n) in [20usize, 40, 60].iter().enumerate() {
                let proxy = mean_measure(&subsample_diagrams(&data, n, 200, 1000 + k as u64, &opts).unwrap()).unwrap();
                let mean = mean_measure(&subsample_diagrams(&data, n, 10, k as u64, &opts).unwrap()).unwrap();
                let loss = loss_value(&mean, &reference, p, p, LossKind::Powered).unwrap();
                let var = loss_value(&mean, &proxy, p, p, LossKind::Powered).unwrap();
                let bias = loss_value(&proxy, &reference, p, p, LossKind::Powered).unwrap();
                assert!(loss <= 2f64.powf(p - 1.0) * (var + bias) + 1e-6, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn variance_curve() {
        let data: Dataset = sample_annulus(100, 1.0, 0.5, 2).unwrap().into();
        let opts = PhOptions::new(1);
        let grid = [2, 4, 8, 16, 32, 64];
        let v = variance_rate_check(&data, &opts, 2.0, 2.0, LossKind::Powered, 30, &grid, 4).unwrap();
        assert_eq!(v.rows.len(), grid.len());
        assert_eq!(v.rows.last().unwrap().1, 0.0);
        assert!(v.rows.iter().all(|r| r.1 >= 0.0));
        assert!(v.fit.is_some());
        assert!(variance_rate_check(&data, &opts, 2.0, 2.0, LossKind::Powered, 30, &[4, 2], 4).is_err());
    }

    #[test]
    fn ot_matrix_of_identical_datasets() {
        let a: Dataset = sample_annulus(80, 1.0, 0.5, 1).unwrap().into();
        let b: Dataset = sample_annulus(80, 1.0, 0.2, 2).unwrap().into();
        let opts = PhOptions::new(1);
        let m = export_ot_matrix(&[a.clone(), a.clone(), b], SampleSize::Fraction(0.25), 5, 3, &opts, 2.0, 2.0).unwrap();
        assert_eq!(m[0][1], 0.0);
        for i in 0..3 {
            assert_eq!(m[i][i], 0.0);
            for j in 0..3 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        assert!(m[0][2] > 0.0);
        assert!(export_ot_matrix(&[a], SampleSize::Count(5), 2, 0, &opts, 2.0, 2.0).is_err());
    }
}
