use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use globalts::bounds::{
    bound_halfwidth, local_log_complexity, memory_equivalent, parameter_log_count, BoundQuery,
};
use globalts::dataset::{gen_synthetic, load_csv, split_holdout, write_csv, write_meta_csv};
use globalts::dataset::{GeneratorKind, GeneratorSpec};
use globalts::evaluate::{evaluate, gap_report};
use globalts::experiment::{
    coefficient_dump, coefficients_csv, fmt_sig, run_sweep, sweep_memory, sweep_model,
    sweep_partition, write_outputs, SweepCell, SweepConfig,
};
use globalts::{Method, ModelSpec, PartitionSpec, ScaleConfig, ScaleMode, TimeSeriesSet};

use crate::args::*;

pub enum Outcome {
    Complete,
    /// Finished, but this many cells or series failed.
    Partial(usize),
}

impl Outcome {
    fn from_failures(n: usize) -> Self {
        if n == 0 {
            Self::Complete
        } else {
            Self::Partial(n)
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::SweepMemory(a) => {
            let cfg = sweep_config(a, &["linear"])?;
            let set = load(&a.data)?;
            let cells = sweep_memory(&set, cfg)?;
            finish_sweep(cli, &cells, &a.out, json!({ "mlp_seed": a.model.mlp_seed }))
        }
        Command::SweepModel(a) => {
            let cfg = sweep_config(a, &["linear", "poly2", "poly3", "mlp"])?;
            let set = load(&a.data)?;
            let cells = sweep_model(&set, cfg)?;
            finish_sweep(cli, &cells, &a.out, json!({ "mlp_seed": a.model.mlp_seed }))
        }
        Command::SweepPartition(a) => sweep_partitions(cli, a),
        Command::Evaluate(a) => evaluate_one(cli, a),
        Command::GapReport(a) => gap(cli, a),
        Command::Bounds(a) => bounds(cli, a),
        Command::GenSynthetic(a) => generate(cli, a),
        Command::CoefficientDump(a) => coefficients(cli, a),
    }
}

fn load(data: &DataArgs) -> Result<TimeSeriesSet> {
    let set = load_csv(&data.data, data.meta.as_deref())
        .with_context(|| format!("loading {}", data.data.display()))?;
    log::info!("loaded {} series from {}", set.len(), data.data.display());
    Ok(set)
}

fn scale_config(a: &ScaleArgs) -> ScaleConfig {
    ScaleConfig {
        mode: match a.scale {
            ScaleArg::None => ScaleMode::None,
            ScaleArg::Mase => ScaleMode::Mase,
            ScaleArg::Mean => ScaleMode::Mean,
        },
        seasonal: a.seasonal_scale,
        scale_feature: a.scale_feature,
    }
}

fn model_spec(name: &str, opts: &ModelArgs) -> Result<ModelSpec> {
    let mut spec: ModelSpec = name.trim().parse()?;
    if let Some(d) = opts.degree {
        spec = match spec {
            ModelSpec::Linear { intercept } | ModelSpec::Poly { intercept, .. } => match d {
                1 => ModelSpec::Linear { intercept },
                2 | 3 => ModelSpec::Poly {
                    degree: d,
                    intercept,
                },
                _ => bail!("--degree must be 1, 2 or 3, got {d}"),
            },
            other => other,
        };
    }
    if let ModelSpec::Mlp(cfg) = &mut spec {
        cfg.seed = opts.mlp_seed;
        if let Some(e) = opts.mlp_epochs {
            cfg.max_epochs = e;
        }
        if let Some(p) = opts.mlp_patience {
            cfg.patience = p;
        }
    }
    Ok(spec.with_intercept(!opts.no_intercept))
}

fn model_specs(names: &[String], defaults: &[&str], opts: &ModelArgs) -> Result<Vec<ModelSpec>> {
    if names.is_empty() {
        defaults.iter().map(|n| model_spec(n, opts)).collect()
    } else {
        names.iter().map(|n| model_spec(n, opts)).collect()
    }
}

fn sweep_config(a: &SweepArgs, default_models: &[&str]) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::new(model_specs(&a.models, default_models, &a.model)?);
    cfg.lags = a.lags.as_ref().map(|l| l.0.clone()).unwrap_or_default();
    cfg.scale = scale_config(&a.scale);
    cfg.min_length_filter = a.min_length_filter;
    cfg.feature_cap = a.model.feature_cap;
    Ok(cfg)
}

fn sweep_partitions(cli: &Cli, a: &PartitionSweepArgs) -> Result<Outcome> {
    let cfg = sweep_config(&a.sweep, &["linear"])?;
    let set = load(&a.sweep.data)?;
    let cells = match &a.partition_key {
        Some(key) => {
            if let Some(local) = cfg.models.iter().find(|m| !m.is_global()) {
                bail!("partition sweeps need global models, got '{local}'");
            }
            let mut cfg = cfg;
            cfg.partitions = vec![PartitionSpec::ByKey(key.clone())];
            run_sweep(&set, &cfg)?
        }
        None => sweep_partition(&set, cfg, &a.partitions, a.partition_seed)?,
    };
    let seeds = json!({
        "partition_seed": a.partition_seed,
        "mlp_seed": a.sweep.model.mlp_seed,
    });
    finish_sweep(cli, &cells, &a.sweep.out, seeds)
}

fn evaluate_one(cli: &Cli, a: &EvaluateArgs) -> Result<Outcome> {
    let spec = model_spec(&a.model, &a.model_opts)?;
    let order = match (a.lag, spec.uses_order()) {
        (Some(p), _) => p,
        (None, false) => 1,
        (None, true) => bail!("model '{spec}' needs --lag"),
    };
    let partition = match (&a.partition_key, a.partitions) {
        (Some(key), _) => PartitionSpec::ByKey(key.clone()),
        (None, Some(groups)) => PartitionSpec::Random {
            groups,
            seed: a.partition_seed,
        },
        (None, None) => PartitionSpec::Trivial,
    };
    if !spec.is_global() && partition != PartitionSpec::Trivial {
        bail!("partitioning applies to global models only, got '{spec}'");
    }
    let mut method = Method::new(spec.clone(), order)
        .with_scale(scale_config(&a.scale))
        .with_partition(partition.clone());
    method.feature_cap = a.model_opts.feature_cap;

    let set = load(&a.data)?;
    let split = split_holdout(&set)?;
    let report = evaluate(&split, &method)?;
    println!(
        "{} lag {}: mase {} smape {} mae {} ({} series, {} failed)",
        report.model,
        order,
        fmt_sig(report.aggregate.mase),
        fmt_sig(report.aggregate.smape),
        fmt_sig(report.aggregate.mae),
        report.per_series.len(),
        report.failures.len()
    );
    let cell = SweepCell {
        model: spec.to_string(),
        lag: order,
        partition,
        n_features: spec.feature_count(order, usize::from(a.scale.scale_feature)),
        n_series: set.len(),
        report: Ok(report),
    };
    let seeds = json!({
        "partition_seed": a.partition_seed,
        "mlp_seed": a.model_opts.mlp_seed,
    });
    finish(cli, &[cell], &a.out, seeds)
}

fn gap(cli: &Cli, a: &GapArgs) -> Result<Outcome> {
    let scale = scale_config(&a.scale);
    let methods = model_specs(&a.models, &[], &a.model)?
        .into_iter()
        .map(|spec| {
            let mut m = Method::new(spec, a.lag).with_scale(scale);
            m.feature_cap = a.model.feature_cap;
            m
        })
        .collect::<Vec<_>>();
    let set = load(&a.data)?;
    let split = split_holdout(&set)?;
    let results = gap_report(&methods, &split);

    println!(
        "{:<10} {:>16} {:>16} {:>16}",
        "model", "insample", "outsample_1step", "gap"
    );
    let mut cells = Vec::new();
    for (method, (name, report)) in methods.iter().zip(results) {
        match &report {
            Ok(r) => println!(
                "{:<10} {:>16} {:>16} {:>16}",
                name,
                fmt_sig(r.insample),
                fmt_sig(r.outsample_onestep),
                fmt_sig(r.gap)
            ),
            Err(e) => println!("{name:<10} failed: {e}"),
        }
        cells.push(SweepCell {
            model: name,
            lag: a.lag,
            partition: PartitionSpec::Trivial,
            n_features: method
                .spec
                .feature_count(a.lag, usize::from(a.scale.scale_feature)),
            n_series: set.len(),
            report,
        });
    }
    finish(cli, &cells, &a.out, json!({ "mlp_seed": a.model.mlp_seed }))
}

fn finish_sweep(cli: &Cli, cells: &[SweepCell], out: &Path, seeds: Value) -> Result<Outcome> {
    let ok = cells.iter().filter(|c| c.report.is_ok()).count();
    eprintln!("{ok} of {} cells succeeded; results in {}", cells.len(), out.display());
    finish(cli, cells, out, seeds)
}

/// Writes the CSV artifacts, the failure list and the manifest.
fn finish(cli: &Cli, cells: &[SweepCell], out: &Path, seeds: Value) -> Result<Outcome> {
    write_outputs(cells, out).with_context(|| format!("writing to {}", out.display()))?;
    let (failures, n) = failures_csv(cells);
    fs::write(out.join("failures.csv"), failures)?;
    write_manifest(
        cli,
        out,
        seeds,
        &["summary.csv", "per_series.csv", "failures.csv"],
    )?;
    Ok(Outcome::from_failures(n))
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Failed cells (empty series id) and series excluded from successful
/// cells, with the number of rows.
fn failures_csv(cells: &[SweepCell]) -> (String, usize) {
    let mut out = String::from("model,lag,partitions,series_id,error\n");
    let mut n = 0;
    for c in cells {
        let mut row = |series: &str, err: &str| {
            n += 1;
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.model,
                c.lag,
                c.partitions(),
                quote(series),
                quote(err)
            );
        };
        match &c.report {
            Err(e) => row("", &e.to_string()),
            Ok(r) => {
                for (id, err) in &r.failures {
                    row(id, err);
                }
            }
        }
    }
    (out, n)
}

fn write_manifest(cli: &Cli, out: &Path, seeds: Value, artifacts: &[&str]) -> Result<()> {
    fs::create_dir_all(out)?;
    let manifest = json!({
        "tool": "globalts",
        "version": globalts::VERSION,
        "argv": std::env::args().collect::<Vec<_>>(),
        "invocation": cli,
        "seeds": seeds,
        "artifacts": artifacts,
    });
    fs::write(out.join("run.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Reads one number per line; blank lines and `#` comments are skipped and
/// for comma-separated lines the last field is used.
fn read_numbers<T: std::str::FromStr>(path: &Path) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse() {
            Ok(v) => out.push(v),
            // a non-numeric first line is taken as a header
            Err(_) if out.is_empty() && i == 0 => continue,
            Err(e) => bail!("{}:{}: '{field}': {e}", path.display(), i + 1),
        }
    }
    if out.is_empty() {
        bail!("{} contains no values", path.display());
    }
    Ok(out)
}

fn bounds(cli: &Cli, a: &BoundsArgs) -> Result<Outcome> {
    let file_k = |count: usize| -> Result<usize> {
        match a.k {
            Some(k) if k != count => bail!("--k {k} disagrees with {count} entries in the file"),
            _ => Ok(count),
        }
    };
    let mut rows: Vec<(String, f64, usize)> = Vec::new();
    if let Some(h) = a.log_hyp {
        let Some(k) = a.k else {
            bail!("--log-hyp needs --k");
        };
        rows.push(("global".into(), h, k));
    }
    if let Some(path) = &a.per_series_log_hyp {
        let sizes: Vec<f64> = read_numbers(path)?;
        rows.push(("local".into(), local_log_complexity(&sizes)?, file_k(sizes.len())?));
    }
    if let Some(path) = &a.memory_orders {
        let orders: Vec<usize> = read_numbers(path)?;
        let k = file_k(orders.len())?;
        let local: f64 = orders.iter().map(|&o| parameter_log_count(o)).sum();
        let m = memory_equivalent(&orders);
        rows.push(("local-ar".into(), local, k));
        rows.push((format!("global-ar({m})"), parameter_log_count(m), k));
    }
    if rows.is_empty() {
        bail!("give at least one of --log-hyp, --per-series-log-hyp, --memory-orders");
    }

    let mut csv = String::from("class,log_hyp,n,k,delta,t\n");
    println!(
        "{:<16} {:>16} {:>12} {:>8} {:>8} {:>16}",
        "class", "log_hyp", "N", "K", "delta", "t"
    );
    for (label, log_hyp, k) in &rows {
        for &n in &a.n {
            let t = bound_halfwidth(BoundQuery {
                log_hyp: *log_hyp,
                n,
                k: *k,
                delta: a.delta,
            })?
            .t;
            println!(
                "{:<16} {:>16} {:>12} {:>8} {:>8} {:>16}",
                label,
                fmt_sig(*log_hyp),
                fmt_sig(n),
                k,
                fmt_sig(a.delta),
                fmt_sig(t)
            );
            let _ = writeln!(
                csv,
                "{label},{},{},{k},{},{}",
                fmt_sig(*log_hyp),
                fmt_sig(n),
                fmt_sig(a.delta),
                fmt_sig(t)
            );
        }
    }
    if let Some(out) = &a.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("bounds.csv"), csv)?;
        write_manifest(cli, out, json!({}), &["bounds.csv"])?;
    }
    Ok(Outcome::Complete)
}

fn generate(cli: &Cli, a: &GenArgs) -> Result<Outcome> {
    let kind = match a.kind {
        GenKind::Ar1 => GeneratorKind::Ar1 { phi: a.phi },
        GenKind::Seasonal => GeneratorKind::Seasonal {
            period: a.period,
            amplitude: a.amplitude,
        },
        GenKind::Mixed => GeneratorKind::Mixed {
            phi: a.phi,
            period: a.period,
            amplitude: a.amplitude,
        },
        GenKind::Quadratic => GeneratorKind::QuadraticMap { r: a.r },
    };
    let mut spec = GeneratorSpec::new(a.count, a.length, kind, a.noise_sd, a.seed);
    spec.start = a.start;
    spec.horizon = a.horizon;
    spec.id_prefix = a.prefix.clone();
    let set = gen_synthetic(&spec)?;
    fs::create_dir_all(&a.out)?;
    write_csv(&set, &a.out.join("data.csv"))?;
    write_meta_csv(&set, &a.out.join("meta.csv"))?;
    write_manifest(cli, &a.out, json!({ "seed": a.seed }), &["data.csv", "meta.csv"])?;
    eprintln!("wrote {} series to {}", set.len(), a.out.display());
    Ok(Outcome::Complete)
}

fn coefficients(cli: &Cli, a: &CoefficientArgs) -> Result<Outcome> {
    let set = load(&a.data)?;
    let rows = coefficient_dump(&set, &a.lags.0, scale_config(&a.scale), !a.no_intercept)?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("coefficients.csv"), coefficients_csv(&rows))?;
    write_manifest(cli, &a.out, json!({}), &["coefficients.csv"])?;
    eprintln!("wrote {} coefficients to {}", rows.len(), a.out.display());
    Ok(Outcome::Complete)
}
