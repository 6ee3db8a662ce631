//! Sweep runners over memory, model class and partition count, and the CSV
//! artifacts they produce.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::{split_holdout, TimeSeriesSet};
use crate::embed::DEFAULT_FEATURE_CAP;
use crate::error::{Error, Result};
use crate::evaluate::{evaluate, fit_method, EvalReport, Method, PartitionSpec};
use crate::models::ModelSpec;
use crate::preprocess::ScaleConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub models: Vec<ModelSpec>,
    /// Memory levels; empty means `1..=shortest train length - 1`.
    pub lags: Vec<usize>,
    pub partitions: Vec<PartitionSpec>,
    pub scale: ScaleConfig,
    /// Per lag, keep only series whose train part is longer than the lag.
    pub min_length_filter: bool,
    pub feature_cap: usize,
}

impl SweepConfig {
    pub fn new(models: Vec<ModelSpec>) -> Self {
        Self {
            models,
            lags: Vec::new(),
            partitions: vec![PartitionSpec::Trivial],
            scale: ScaleConfig::default(),
            min_length_filter: false,
            feature_cap: DEFAULT_FEATURE_CAP,
        }
    }
}

/// One (model, lag, partition) evaluation.
#[derive(Debug)]
pub struct SweepCell {
    pub model: String,
    pub lag: usize,
    pub partition: PartitionSpec,
    pub n_features: usize,
    pub n_series: usize,
    pub report: Result<EvalReport>,
}

impl SweepCell {
    /// Partition count reported in the summary: the number of groups, or
    /// the number of series for local models.
    pub fn partitions(&self) -> usize {
        match &self.report {
            Ok(r) => r.partitions,
            Err(_) => match self.partition {
                PartitionSpec::Random { groups, .. } => groups,
                PartitionSpec::Atomic => self.n_series,
                _ => 1,
            },
        }
    }
}

/// Lags used when none are given: every order the shortest train part can
/// be embedded at.
pub fn default_lags(set: &TimeSeriesSet) -> Result<Vec<usize>> {
    let shortest = set.iter().map(|s| s.len().saturating_sub(s.horizon)).min().unwrap_or(0);
    if shortest < 2 {
        return Err(Error::Param("no valid lags: shortest train part has < 2 values".into()));
    }
    Ok((1..shortest).collect())
}

/// Runs every cell of `models x partitions x lags`. Cell failures are kept
/// in the output rather than aborting the sweep.
pub fn run_sweep(set: &TimeSeriesSet, cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    let lags = if cfg.lags.is_empty() {
        default_lags(set)?
    } else {
        cfg.lags.clone()
    };
    if lags.is_empty() || cfg.models.is_empty() || cfg.partitions.is_empty() {
        return Err(Error::Param("sweep needs at least one model, lag and partition".into()));
    }
    let mut jobs = Vec::new();
    for spec in &cfg.models {
        for part in &cfg.partitions {
            for &lag in &lags {
                jobs.push((spec, part, lag));
            }
        }
    }
    let cells = jobs
        .into_par_iter()
        .map(|(spec, part, lag)| {
            let subset = if cfg.min_length_filter {
                set.filter(|s| s.len().saturating_sub(s.horizon) > lag)
            } else {
                Ok(set.clone())
            };
            let n_series = subset.as_ref().map_or(0, TimeSeriesSet::len);
            let method = Method {
                spec: spec.clone(),
                order: lag,
                scale: cfg.scale,
                partition: part.clone(),
                feature_cap: cfg.feature_cap,
            };
            let report = subset
                .and_then(|s| split_holdout(&s))
                .and_then(|split| evaluate(&split, &method));
            if let Err(e) = &report {
                log::warn!("cell {spec} lag {lag} {part:?} failed: {e}");
            }
            SweepCell {
                model: spec.to_string(),
                lag,
                partition: part.clone(),
                n_features: spec.feature_count(lag, usize::from(cfg.scale.scale_feature)),
                n_series,
                report,
            }
        })
        .collect();
    Ok(cells)
}

/// Memory sweep: each model at every lag, no partitioning.
pub fn sweep_memory(set: &TimeSeriesSet, mut cfg: SweepConfig) -> Result<Vec<SweepCell>> {
    cfg.partitions = vec![PartitionSpec::Trivial];
    run_sweep(set, &cfg)
}

/// Model-class sweep; defaults to linear, poly2, poly3 and MLP.
pub fn sweep_model(set: &TimeSeriesSet, mut cfg: SweepConfig) -> Result<Vec<SweepCell>> {
    if cfg.models.is_empty() {
        cfg.models = ["linear", "poly2", "poly3", "mlp"]
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_>>()?;
    }
    cfg.partitions = vec![PartitionSpec::Trivial];
    run_sweep(set, &cfg)
}

/// Partition sweep over random equal-size partitions of each size.
pub fn sweep_partition(
    set: &TimeSeriesSet,
    mut cfg: SweepConfig,
    counts: &[usize],
    seed: u64,
) -> Result<Vec<SweepCell>> {
    if let Some(local) = cfg.models.iter().find(|m| !m.is_global()) {
        return Err(Error::Usage(format!("partition sweeps need global models, got '{local}'")));
    }
    cfg.partitions = counts
        .iter()
        .map(|&groups| PartitionSpec::Random { groups, seed })
        .collect();
    run_sweep(set, &cfg)
}

/// Formats like C's `%.10g`: ten significant digits, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 10;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const SUMMARY_HEADER: &str =
    "model,lag,partitions,mase,smape,mae,insample_mase,outsample_onestep_mase,gap,n_failed";
pub const PER_SERIES_HEADER: &str = "series_id,model,lag,step,forecast,actual,abs_error";

/// Summary rows for the successful cells, in cell order.
pub fn summary_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for c in cells {
        if let Ok(r) = &c.report {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                c.model,
                c.lag,
                c.partitions(),
                fmt_sig(r.aggregate.mase),
                fmt_sig(r.aggregate.smape),
                fmt_sig(r.aggregate.mae),
                fmt_sig(r.insample),
                fmt_sig(r.outsample_onestep),
                fmt_sig(r.gap),
                r.failures.len()
            );
        }
    }
    out
}

pub fn per_series_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from(PER_SERIES_HEADER);
    out.push('\n');
    for c in cells {
        let Ok(r) = &c.report else { continue };
        for s in &r.per_series {
            for (h, (f, a)) in s.forecasts.iter().zip(&s.actual).enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    s.id,
                    c.model,
                    c.lag,
                    h + 1,
                    fmt_sig(*f),
                    fmt_sig(*a),
                    fmt_sig((f - a).abs())
                );
            }
        }
    }
    out
}

pub fn write_outputs(cells: &[SweepCell], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("summary.csv"), summary_csv(cells))?;
    std::fs::write(dir.join("per_series.csv"), per_series_csv(cells))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub order: usize,
    /// 0 for the intercept, otherwise `k` for the coefficient on `v[t-k]`.
    pub lag: usize,
    pub coefficient: f64,
}

/// Global linear coefficients for each memory level, fitted on the train
/// part of every series.
pub fn coefficient_dump(
    set: &TimeSeriesSet,
    lags: &[usize],
    scale: ScaleConfig,
    intercept: bool,
) -> Result<Vec<CoefficientRow>> {
    let split = split_holdout(set)?;
    let mut rows = Vec::new();
    for &p in lags {
        let method = Method::new(ModelSpec::Linear { intercept }, p).with_scale(scale);
        let fitted = fit_method(&split.train, &method)?;
        let coef = fitted.models[0].coefficients().expect("linear model");
        rows.push(CoefficientRow {
            order: p,
            lag: 0,
            coefficient: coef[0],
        });
        // weights run oldest first, so weight j multiplies v[t - (p - j)]
        for (j, &w) in coef[1..=p].iter().enumerate() {
            rows.push(CoefficientRow {
                order: p,
                lag: p - j,
                coefficient: w,
            });
        }
    }
    Ok(rows)
}

pub fn coefficients_csv(rows: &[CoefficientRow]) -> String {
    let mut out = String::from("order,term,coefficient\n");
    for r in rows {
        let term = if r.lag == 0 {
            "intercept".to_string()
        } else {
            format!("lag{}", r.lag)
        };
        let _ = writeln!(out, "{},{},{}", r.order, term, fmt_sig(r.coefficient));
    }
    out
}
