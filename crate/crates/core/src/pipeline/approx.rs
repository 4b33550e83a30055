use rayon::prelude::*;

use crate::error::{arg, Result};
use crate::means::{frechet_mean, mean_measure, quantize, FrechetConfig, FrechetMean, Quantization, QuantizationConfig};
use crate::measure::PersistenceMeasure;
use crate::pointcloud::{subsample, Dataset};
use crate::rng::derive_seed;
use crate::vr::{dataset_persistence, PersistenceDiagram};

/// Per-subsample persistence settings and optional summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct PhOptions {
    pub hom_dim: usize,
    /// Points with persistence below this are dropped from every diagram.
    pub min_persistence: f64,
    pub with_replacement: bool,
    pub max_scale: Option<f64>,
    pub frechet: Option<FrechetConfig>,
    pub quantize: Option<QuantizationConfig>,
}

impl PhOptions {
    pub fn new(hom_dim: usize) -> Self {
        Self {
            hom_dim,
            min_persistence: 0.0,
            with_replacement: false,
            max_scale: None,
            frechet: None,
            quantize: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    pub mean: PersistenceMeasure,
    pub diagrams: Vec<PersistenceDiagram>,
    pub frechet: Option<FrechetMean>,
    pub quantized: Option<Quantization>,
}

/// Persistence diagram of a whole dataset at one dimension, filtered.
pub fn persistence_at(data: &Dataset, opts: &PhOptions) -> Result<PersistenceDiagram> {
    let mut all = dataset_persistence(data, opts.hom_dim, opts.max_scale)?;
    let d = all.swap_remove(opts.hom_dim);
    Ok(d.filter_by_persistence(opts.min_persistence))
}

/// Diagrams of `b` subsamples of size `n`; subsample `j` is drawn from
/// `derive_seed(seed, j)`.
pub fn subsample_diagrams(data: &Dataset, n: usize, b: usize, seed: u64, opts: &PhOptions) -> Result<Vec<PersistenceDiagram>> {
    if n == 0 || b == 0 {
        return arg("n and B must be at least 1");
    }
    (0..b)
        .into_par_iter()
        .map(|j| {
            let idx = subsample(data.len(), n, derive_seed(seed, j as u64), opts.with_replacement)?;
            persistence_at(&data.select(&idx), opts)
        })
        .collect()
}

/// Mean persistence measure of `b` subsample diagrams, plus the Fréchet
/// mean and quantization of that mean when requested.
pub fn approximate_ph(data: &Dataset, n: usize, b: usize, seed: u64, opts: &PhOptions) -> Result<Approximation> {
    let diagrams = subsample_diagrams(data, n, b, seed, opts)?;
    let mean = mean_measure(&diagrams)?;
    let frechet = match &opts.frechet {
        Some(cfg) => Some(frechet_mean(&diagrams, cfg)?),
        None => None,
    };
    let quantized = match &opts.quantize {
        Some(cfg) => Some(quantize(&mean, cfg)?),
        None => None,
    };
    Ok(Approximation {
        mean,
        diagrams,
        frechet,
        quantized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::diagram_to_measure;
    use crate::pointcloud::{sample_annulus, sample_torus};
    use crate::transport::ot_distance;

    #[test]
    fn degenerate_pipeline_is_exact() {
        for seed in 0..5 {
            let data: Dataset = sample_annulus(60, 1.0, 0.5, seed).unwrap().into();
            for dim in 0..2 {
                let opts = PhOptions::new(dim);
                let reference = persistence_at(&data, &opts).unwrap();
                let a = approximate_ph(&data, 60, 1, seed + 100, &opts).unwrap();
                assert_eq!(a.diagrams[0].without_essential(), reference.without_essential());
                let (d, _) = ot_distance(&a.mean, &diagram_to_measure(&reference), 2.0, 2.0).unwrap();
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let data: Dataset = sample_torus(300, 0.8, 0.3, 1).unwrap().into();
        let mut opts = PhOptions::new(1);
        opts.quantize = Some(QuantizationConfig::new(4, 2.0));
        opts.frechet = Some(FrechetConfig::default());
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| approximate_ph(&data, 40, 6, 9, &opts).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn rejects_empty_requests() {
        let data: Dataset = sample_annulus(10, 1.0, 0.5, 0).unwrap().into();
        let opts = PhOptions::new(1);
        assert!(approximate_ph(&data, 0, 2, 0, &opts).is_err());
        assert!(approximate_ph(&data, 2, 0, 0, &opts).is_err());
        assert!(approximate_ph(&data, 11, 1, 0, &opts).is_err());
    }
}
