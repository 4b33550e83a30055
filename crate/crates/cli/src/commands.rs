use std::fs;
use std::io::Write;
use std::path::Path;

use phsub::fmt::g17;
use phsub::means::{
    frechet_mean, mean_measure, quantize, write_trace_jsonl, FrechetConfig, FrechetInit, QuantInit, QuantizationConfig,
};
use phsub::measure::PersistenceMeasure;
use phsub::pipeline::{
    approximate_ph, bias_bound, export_ot_matrix, hausdorff_tail_bound, loss_curve_svg, rate_experiment_on,
    subsample_diagrams, variance_rate_check, BRule, DatasetSpec, ExperimentConfig, FitMode, LossKind, PhOptions,
    SampleSize,
};
use phsub::pointcloud::{load_point_csv, write_distance_csv, Dataset, StandardAssumptionParams};
use phsub::transport::{bottleneck, ot_distance, p_hausdorff, wasserstein};
use phsub::vr::{dataset_persistence, write_diagrams_json, PersistenceDiagram};
use phsub::{Error, Result};

use crate::args::{Cli, Command, Common, DistKind, Experiment, Format, RateArgs};
use crate::output::{sink, write_diagrams, write_measure, write_table};

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn load(spec: &str) -> Result<Dataset> {
    spec.parse::<DatasetSpec>()?.load().map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{spec}: {io}"))),
        other => other,
    })
}

fn options(c: &Common, with_replacement: bool) -> PhOptions {
    PhOptions {
        min_persistence: c.min_persistence,
        with_replacement,
        ..PhOptions::new(c.dim)
    }
}

fn read_diagrams(path: &Path) -> Result<Vec<PersistenceDiagram>> {
    PersistenceDiagram::list_from_json(&fs::read_to_string(path)?)
}

/// A measure file, or diagram files averaged into a measure.
fn read_measure(path: &Path) -> Result<PersistenceMeasure> {
    let text = fs::read_to_string(path)?;
    match PersistenceMeasure::from_json(&text) {
        Ok(m) => Ok(m),
        Err(_) => mean_measure(&PersistenceDiagram::list_from_json(&text)?),
    }
}

fn parse_fit(s: &str) -> Result<FitMode> {
    match s.split_once(':') {
        None if s == "free" => Ok(FitMode::Free),
        Some(("fixed", c)) => c
            .parse()
            .map(FitMode::Fixed)
            .map_err(|_| Error::Config(format!("bad exponent in --fit {s}"))),
        _ => config_err(format!("--fit must be 'free' or 'fixed:C', got '{s}'")),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let c = cli.common;
    let out = c.output.as_deref();
    match cli.command {
        Command::Compute { data, max_scale, all_dims } => {
            let data = load(&data)?;
            let mut ds: Vec<PersistenceDiagram> = dataset_persistence(&data, c.dim, max_scale)?
                .into_iter()
                .map(|d| d.filter_by_persistence(c.min_persistence))
                .collect();
            if !all_dims {
                ds = vec![ds.swap_remove(c.dim)];
            }
            write_diagrams(&ds, c.format.unwrap_or(Format::Json), &mut *sink(out)?)?;
        }
        Command::SubsampleMean { data, sub, diagrams } => {
            let data = load(&data)?;
            let a = approximate_ph(&data, sub.n, sub.b, c.seed, &options(&c, sub.with_replacement))?;
            if let Some(path) = diagrams {
                write_diagrams_json(&a.diagrams, fs::File::create(path)?)?;
            }
            write_measure(&a.mean, c.format.unwrap_or(Format::Json), &mut *sink(out)?)?;
        }
        Command::Frechet { inputs, data, sub, init, max_iter, trace } => {
            let diagrams = match data {
                Some(spec) => {
                    let (Some(n), Some(b)) = (sub.n, sub.b) else {
                        return config_err("--data needs --n and --b");
                    };
                    subsample_diagrams(&load(&spec)?, n, b, c.seed, &options(&c, sub.with_replacement))?
                }
                None if inputs.is_empty() => return config_err("give diagram files or --data"),
                None => {
                    let mut all = Vec::new();
                    for path in &inputs {
                        all.extend(read_diagrams(path)?);
                    }
                    all
                }
            };
            let init = match init.split_once(':') {
                None if init == "median" => FrechetInit::Median,
                Some(("index", k)) => FrechetInit::Index(k.parse().map_err(|_| Error::Config(format!("bad --init {init}")))?),
                Some(("seed", s)) => FrechetInit::Seed(s.parse().map_err(|_| Error::Config(format!("bad --init {init}")))?),
                _ => return config_err(format!("--init must be median, index:K or seed:S, got '{init}'")),
            };
            let r = frechet_mean(&diagrams, &FrechetConfig { init, max_iter })?;
            if let Some(path) = trace {
                let rows = r.trace.iter().map(|s| (s.iteration, s.value, s.changes));
                write_trace_jsonl(rows, "value", fs::File::create(path)?)?;
            }
            let near = r.trace.last().map_or(0, |s| s.near_diagonal);
            eprintln!(
                "frechet value {} after {} iterations, converged: {}, near-diagonal points: {near}",
                g17(r.value),
                r.trace.len(),
                r.converged
            );
            write_diagrams(&[r.diagram], c.format.unwrap_or(Format::Json), &mut *sink(out)?)?;
        }
        Command::Quantize { input, k, max_iter, rel_tol, trace, diagram } => {
            let mu = read_measure(&input)?;
            let cfg = QuantizationConfig {
                k,
                init: QuantInit::GreedyPersistence,
                max_iter,
                rel_tol,
                p: c.p,
                q: c.q(),
            };
            let r = quantize(&mu, &cfg)?;
            if let Some(path) = trace {
                let rows = r.trace.iter().map(|s| (s.iteration, s.loss, s.reassigned + s.dropped));
                write_trace_jsonl(rows, "loss", fs::File::create(path)?)?;
            }
            eprintln!("quantization loss {} ({}), {} atoms", g17(r.loss), r.stop, r.measure.len());
            let format = c.format.unwrap_or(Format::Json);
            let mut w = sink(out)?;
            if diagram {
                write_diagrams(&[r.measure.round_to_diagram()?], format, &mut *w)?;
            } else {
                write_measure(&r.measure, format, &mut *w)?;
            }
        }
        Command::Dist { kind, a, b, plan } => {
            let mut plan_out = match &plan {
                Some(p) => Some(fs::File::create(p)?),
                None => None,
            };
            let distance = match kind {
                DistKind::Wasserstein => {
                    let outcome = wasserstein(&read_one(&a)?, &read_one(&b)?, c.p, c.q())?;
                    if let Some(f) = plan_out.as_mut() {
                        match outcome.matching() {
                            Some(m) => m.write_json(f)?,
                            None => writeln!(f, "null")?,
                        }
                    }
                    outcome.distance()
                }
                DistKind::Bottleneck => {
                    let (d, m) = bottleneck(&read_one(&a)?, &read_one(&b)?, c.q())?;
                    if let Some(f) = plan_out.as_mut() {
                        m.write_json(f)?;
                    }
                    d
                }
                DistKind::Ot => {
                    let (d, p) = ot_distance(&read_measure(&a)?, &read_measure(&b)?, c.p, c.q())?;
                    if let Some(f) = plan_out.as_mut() {
                        p.write_json(f)?;
                    }
                    d
                }
                DistKind::Hausdorff => {
                    let (d, corr) = p_hausdorff(&load_point_csv(&a)?, &load_point_csv(&b)?, c.p)?;
                    if let Some(f) = plan_out.as_mut() {
                        let pairs: Vec<String> = corr.pairs.iter().map(|(i, j)| format!("[{i}, {j}]")).collect();
                        writeln!(f, "{{\"cost\": {}, \"pairs\": [{}]}}", g17(corr.cost), pairs.join(", "))?;
                    }
                    d
                }
            };
            let rows = vec![vec![g17(distance)]];
            write_table(&["distance"], &rows, c.format.unwrap_or(Format::Json), &mut *sink(out)?)?;
        }
        Command::Experiment(Experiment::Rate(args)) => rate(&c, *args)?,
        Command::Experiment(Experiment::Variance { data, n, b_grid, with_replacement, distance }) => {
            let data = load(&data)?;
            let kind = if distance { LossKind::Distance } else { LossKind::Powered };
            let v = variance_rate_check(&data, &options(&c, with_replacement), c.p, c.q(), kind, n, &b_grid, c.seed)?;
            let max_b = *b_grid.last().expect("non-empty grid");
            eprintln!("losses are against the proxy mean measure at B = {max_b}");
            if let Some(f) = &v.fit {
                eprintln!("fit: a0 = {}, a1 = {}, c = {} (reference exponent 0.5), sse = {}", g17(f.a0), g17(f.a1), g17(f.c), g17(f.sse));
            }
            let rows: Vec<Vec<String>> = v.rows.iter().map(|&(b, l)| vec![b.to_string(), g17(l)]).collect();
            write_table(&["B", "loss_vs_proxy"], &rows, c.format.unwrap_or(Format::Csv), &mut *sink(out)?)?;
        }
        Command::Bounds { a, b, r0, big_n, n_grid, r } => {
            let params = StandardAssumptionParams::new(a, b, r0)?;
            let mut rows = Vec::new();
            for &n in &n_grid {
                let bias = match bias_bound(&params, c.p, n, big_n) {
                    Ok(v) => v,
                    Err(Error::Argument(m)) => {
                        eprintln!("n = {n}: {m}");
                        f64::NAN
                    }
                    Err(e) => return Err(e),
                };
                let mut row = vec![n.to_string(), g17(bias)];
                if let Some(r) = r {
                    row.push(g17(hausdorff_tail_bound(&params, c.p, n, big_n, r)?));
                }
                rows.push(row);
            }
            let header: &[&str] = if r.is_some() { &["n", "bias_bound", "tail_bound"] } else { &["n", "bias_bound"] };
            eprintln!("constants a, b, r0 are not calibrated; compare shapes, not values");
            write_table(header, &rows, c.format.unwrap_or(Format::Csv), &mut *sink(out)?)?;
        }
        Command::Otmatrix { data, n, fraction, b, with_replacement } => {
            let size = match (n, fraction) {
                (Some(n), None) => SampleSize::Count(n),
                (None, Some(f)) => SampleSize::Fraction(f),
                _ => return config_err("give exactly one of --n and --fraction"),
            };
            let datasets: Vec<Dataset> = data.iter().map(|s| load(s)).collect::<Result<_>>()?;
            let m = export_ot_matrix(&datasets, size, b, c.seed, &options(&c, with_replacement), c.p, c.q())?;
            let mut w = sink(out)?;
            match c.format.unwrap_or(Format::Csv) {
                Format::Csv => write_distance_csv(m.len(), |i, j| m[i][j], &mut w)?,
                Format::Json => {
                    let rows: Vec<String> = m
                        .iter()
                        .map(|r| format!("[{}]", r.iter().map(|&x| g17(x)).collect::<Vec<_>>().join(", ")))
                        .collect();
                    writeln!(w, "[{}]", rows.join(",\n "))?;
                }
            }
        }
    }
    Ok(())
}

fn read_one(path: &Path) -> Result<PersistenceDiagram> {
    let mut ds = read_diagrams(path)?;
    if ds.len() != 1 {
        return Err(Error::Parse {
            line: 1,
            message: format!("{} holds {} diagrams, expected one", path.display(), ds.len()),
        });
    }
    Ok(ds.remove(0))
}

fn rate(c: &Common, a: RateArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(path) => ExperimentConfig::from_json(&fs::read_to_string(path)?)?,
        None => {
            let b_rule = match (a.b_prop, a.b_power, a.b_list.is_empty()) {
                (Some(x), None, true) => BRule::Proportional(x),
                (None, Some(e), true) => BRule::Power(e),
                (None, None, false) => BRule::List(a.b_list.clone()),
                _ => return config_err("give exactly one of --b-prop, --b-power and --b-list"),
            };
            ExperimentConfig {
                dataset: a.data.as_deref().expect("clap requires --data").parse()?,
                p: c.p,
                q: c.q(),
                hom_dim: c.dim,
                n_grid: a.n_grid.clone(),
                b_rule,
                repeats: a.repeats,
                seed: c.seed,
                with_replacement: a.with_replacement,
                min_persistence: c.min_persistence,
                loss: if a.distance { LossKind::Distance } else { LossKind::Powered },
                reference: a.reference.clone(),
                reference_limit: a.reference_limit,
            }
        }
    };
    let fit_mode = a.fit.as_deref().map(parse_fit).transpose()?;
    let bound = match a.bound.as_slice() {
        [] => None,
        [x, y, z] => Some(StandardAssumptionParams::new(*x, *y, *z)?),
        _ => return config_err("--bound takes a,b,r0"),
    };
    let data = cfg.dataset.load()?;
    let curve = rate_experiment_on(&cfg, &data, a.runs.as_deref())?;
    let fit = match fit_mode {
        Some(mode) => {
            let f = curve.fit(mode)?;
            eprintln!("fit ({}): a0 = {}, a1 = {}, c = {}, sse = {}", f.model(), g17(f.a0), g17(f.a1), g17(f.c), g17(f.sse));
            Some(f)
        }
        None => None,
    };
    if let Some(path) = &a.plot {
        let bound_curve = match &bound {
            Some(params) => Some(
                cfg.n_grid
                    .iter()
                    .map(|&n| Ok((n as f64, bias_bound(params, cfg.p, n, data.len())?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let points: Vec<(f64, f64, f64)> = curve.rows.iter().map(|r| (r.n as f64, r.loss, r.loss_std)).collect();
        let title = format!("H{} loss, p = {}", cfg.hom_dim, cfg.p);
        fs::write(path, loss_curve_svg(&title, &points, fit.as_ref(), bound_curve.as_deref()))?;
    }
    let rows: Vec<Vec<String>> = curve
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.b.to_string(), g17(r.loss), g17(r.loss_std), r.repeats.to_string()])
        .collect();
    write_table(&["n", "B", "loss", "loss_std", "repeats"], &rows, c.format.unwrap_or(Format::Csv), &mut *sink(c.output.as_deref())?)?;
    Ok(())
}
