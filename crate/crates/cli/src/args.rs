use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ph", version, about = "Persistent homology of large point clouds from bootstrap subsamples")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Transport exponent.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub p: f64,
    /// Ground norm exponent (`inf` allowed); defaults to `p`.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Homology dimension.
    #[arg(long, global = true, default_value_t = 1)]
    pub dim: usize,
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Drop diagram points with smaller persistence.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub min_persistence: f64,
    /// Output format; tables default to CSV, everything else to JSON.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the main result here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

impl Common {
    pub fn q(&self) -> f64 {
        self.q.unwrap_or(self.p)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rips persistence diagram of a dataset.
    Compute {
        /// Dataset: a file path or a sampler such as `torus:2000:0.8:0.3:1`.
        data: String,
        /// Largest filtration value; defaults to the enclosing radius.
        #[arg(long)]
        max_scale: Option<f64>,
        /// Emit every dimension up to `--dim` instead of `--dim` alone.
        #[arg(long)]
        all_dims: bool,
    },
    /// Mean persistence measure of subsample diagrams.
    SubsampleMean {
        data: String,
        #[command(flatten)]
        sub: Subsampling,
        /// Also write the subsample diagrams as a JSON array.
        #[arg(long)]
        diagrams: Option<PathBuf>,
    },
    /// Fréchet mean of diagrams (p = q = 2).
    Frechet {
        /// Diagram JSON files, each holding one diagram or an array.
        inputs: Vec<PathBuf>,
        /// Take the diagrams from subsamples of this dataset instead.
        #[arg(long, conflicts_with = "inputs")]
        data: Option<String>,
        #[command(flatten)]
        sub: OptionalSubsampling,
        /// `median`, `index:K`, or `seed:S`.
        #[arg(long, default_value = "median")]
        init: String,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        /// Write the per-iteration trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Quantize a persistence measure to `k` atoms.
    Quantize {
        /// Measure JSON, or diagram JSON (one or a list, averaged).
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Emit the result rounded to an integer-multiplicity diagram.
        #[arg(long)]
        diagram: bool,
    },
    /// Distance between two diagrams, measures, or point clouds.
    Dist {
        #[arg(value_enum)]
        kind: DistKind,
        a: PathBuf,
        b: PathBuf,
        /// Write the optimal matching, plan, or correspondence as JSON.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Rate experiments.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Evaluate the bias and tail bounds on an n grid.
    Bounds {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        r0: f64,
        /// Size of the full dataset.
        #[arg(long = "big-n")]
        big_n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        /// Radius for the tail bound.
        #[arg(long)]
        r: Option<f64>,
    },
    /// Pairwise OT distances between mean measures of several datasets.
    Otmatrix {
        #[arg(required = true, num_args = 2..)]
        data: Vec<String>,
        /// Subsample size.
        #[arg(long, conflicts_with = "fraction")]
        n: Option<usize>,
        /// Subsample size as a fraction of each dataset.
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long = "b")]
        b: usize,
        #[arg(long)]
        with_replacement: bool,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    Wasserstein,
    Bottleneck,
    Ot,
    Hausdorff,
}

#[derive(Args, Debug, Clone)]
pub struct Subsampling {
    /// Points per subsample.
    #[arg(long)]
    pub n: usize,
    /// Number of subsamples.
    #[arg(long = "b")]
    pub b: usize,
    #[arg(long)]
    pub with_replacement: bool,
}

#[derive(Args, Debug, Clone)]
pub struct OptionalSubsampling {
    #[arg(long, requires = "data")]
    pub n: Option<usize>,
    #[arg(long = "b", requires = "data")]
    pub b: Option<usize>,
    #[arg(long)]
    pub with_replacement: bool,
}

#[derive(Subcommand, Debug)]
pub enum Experiment {
    /// Loss of the mean measure against the full diagram over an n grid.
    Rate(Box<RateArgs>),
    /// Decay of the mean measure in the number of subsamples at fixed n.
    Variance {
        data: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        b_grid: Vec<usize>,
        #[arg(long)]
        with_replacement: bool,
        /// Report OT_p instead of OT_p^p.
        #[arg(long)]
        distance: bool,
    },
}

#[derive(Args, Debug)]
pub struct RateArgs {
    /// JSON experiment configuration; overrides every experiment flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset: a file path or a sampler such as `torus:5000:0.8:0.3:1`.
    #[arg(long, required_unless_present = "config")]
    pub data: Option<String>,
    #[arg(long, value_delimiter = ',', required_unless_present = "config")]
    pub n_grid: Vec<usize>,
    /// B = ceil(c n).
    #[arg(long, group = "brule")]
    pub b_prop: Option<f64>,
    /// B = ceil(n^e).
    #[arg(long, group = "brule")]
    pub b_power: Option<f64>,
    /// One B per n.
    #[arg(long, value_delimiter = ',', group = "brule")]
    pub b_list: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long)]
    pub with_replacement: bool,
    /// Report OT_p instead of OT_p^p.
    #[arg(long)]
    pub distance: bool,
    /// Reference diagram JSON of the full dataset.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Largest dataset whose reference diagram is computed directly.
    #[arg(long, default_value_t = 20_000)]
    pub reference_limit: usize,
    /// Resumable per-run CSV.
    #[arg(long)]
    pub runs: Option<PathBuf>,
    /// `free` or `fixed:C`.
    #[arg(long)]
    pub fit: Option<String>,
    /// SVG plot of the loss curve.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Overlay the bias bound with these `a,b,r0` constants.
    #[arg(long, value_delimiter = ',')]
    pub bound: Vec<f64>,
}
