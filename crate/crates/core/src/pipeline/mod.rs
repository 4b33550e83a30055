//! Subsampling pipeline, rate experiments, rate fitting and bound evaluators.

mod approx;
mod bounds;
mod experiment;
mod fit;
mod plot;

pub use approx::{approximate_ph, persistence_at, subsample_diagrams, Approximation, PhOptions};
pub use bounds::{bias_bound, hausdorff_tail_bound};
pub use experiment::{
    export_ot_matrix, rate_experiment, rate_experiment_on, reference_diagram, variance_rate_check, write_runs_csv, BRule,
    CurveRow, DatasetSpec, ExperimentConfig, LossCurve, LossKind, RateRow, SampleSize, VarianceCurve,
};
pub use fit::{fit_rate, FitMode, RateFit};
pub use plot::loss_curve_svg;
