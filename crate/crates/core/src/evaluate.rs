//! Recursive multi-step forecasting, accuracy metrics and in-sample versus
//! out-of-sample reporting.

use rayon::prelude::*;

use crate::dataset::{TimeSeries, TimeSeriesSet, TrainTestSplit};
use crate::embed::DEFAULT_FEATURE_CAP;
use crate::error::{Error, Result};
use crate::models::{
    fit_local_ar, fit_theta, naive, predict_one, seasonal_naive, FittedModel, ModelSpec, Params,
};
use crate::partition::{fit_partitioned, keyed_partition, random_partition, Partition};
use crate::preprocess::{
    apply_scale, invert_scale, mase_lag, mean_abs_diff, prepare, Prepared, ScaleConfig,
    ScaleRecord,
};

/// `mean(|f - a|) / mean(|train[t] - train[t - lag]|)`.
pub fn mase(forecast: &[f64], actual: &[f64], train: &[f64], lag: usize) -> Result<f64> {
    let num = mae(forecast, actual)?;
    match mean_abs_diff(train, lag) {
        Some(den) if den > 0.0 => Ok(num / den),
        _ => Err(Error::DegenerateMetric),
    }
}

/// Symmetric MAPE in `[0, 200]`; a term with `f = a = 0` counts as 0.
pub fn smape(forecast: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(forecast, actual)?;
    let sum: f64 = forecast
        .iter()
        .zip(actual)
        .map(|(f, a)| {
            let den = f.abs() + a.abs();
            if den == 0.0 {
                0.0
            } else {
                // ratio first so the result never rounds above 200
                200.0 * ((f - a).abs() / den)
            }
        })
        .sum();
    Ok(sum / forecast.len() as f64)
}

pub fn mae(forecast: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(forecast, actual)?;
    let sum: f64 = forecast.iter().zip(actual).map(|(f, a)| (f - a).abs()).sum();
    Ok(sum / forecast.len() as f64)
}

fn check_lengths(forecast: &[f64], actual: &[f64]) -> Result<()> {
    if forecast.len() != actual.len() || forecast.is_empty() {
        return Err(Error::Dimension {
            expected: actual.len(),
            got: forecast.len(),
        });
    }
    Ok(())
}

/// Forecasts `h` steps by feeding one-step predictions back as inputs.
///
/// The train part is scaled with `record`, forecast in scaled space and the
/// result mapped back to the original scale.
pub fn forecast_recursive(
    model: &FittedModel,
    train: &TimeSeries,
    h: usize,
    record: &ScaleRecord,
    extras: &[f64],
) -> Result<Vec<f64>> {
    let scaled = apply_scale(train, record)?;
    let mut history = scaled.values;
    let n = history.len();
    if n < model.order.max(1) {
        return Err(Error::InsufficientData {
            series: train.id.clone(),
            msg: format!("need {} values to forecast, got {n}", model.order.max(1)),
        });
    }
    let mut out = Vec::with_capacity(h);
    for step in 1..=h {
        let pred = match &model.params {
            Params::Theta { .. } => model.theta_forecast(step).unwrap_or(f64::NAN),
            Params::Naive => predict_one(model, &history[history.len() - 1..], extras)?,
            Params::SNaive { period } => {
                let from = history.len().checked_sub(*period).ok_or(Error::Dimension {
                    expected: *period,
                    got: history.len(),
                })?;
                predict_one(model, &history[from..], extras)?
            }
            _ => predict_one(model, &history[history.len() - model.order..], extras)?,
        };
        if !pred.is_finite() {
            return Err(Error::Instability { step });
        }
        history.push(pred);
        out.push(pred);
    }
    Ok(invert_scale(&out, record))
}

/// Absolute errors of one-step predictions over every in-sample position a
/// model can predict, in the scale of `values`.
pub fn insample_abs_errors(model: &FittedModel, values: &[f64], extras: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    let errs = match &model.params {
        Params::Theta { alpha, drift, .. } => {
            let mut level = values[0];
            let mut out = Vec::with_capacity(n.saturating_sub(1));
            for &y in &values[1..] {
                out.push((level + drift - y).abs());
                level += alpha * (y - level);
            }
            out
        }
        params => {
            let start = match params {
                Params::Naive => 1,
                Params::SNaive { period } => *period,
                _ => model.order,
            };
            (start..n)
                .map(|t| {
                    predict_one(model, &values[t - start..t], extras).map(|f| (f - values[t]).abs())
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(errs)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PartitionSpec {
    #[default]
    Trivial,
    Random {
        groups: usize,
        seed: u64,
    },
    ByKey(String),
    Atomic,
}

/// A complete forecasting procedure: model class, memory, preprocessing and
/// how the set is split before pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub spec: ModelSpec,
    pub order: usize,
    pub scale: ScaleConfig,
    pub partition: PartitionSpec,
    pub feature_cap: usize,
}

impl Method {
    pub fn new(spec: ModelSpec, order: usize) -> Self {
        Self {
            spec,
            order,
            scale: ScaleConfig::default(),
            partition: PartitionSpec::Trivial,
            feature_cap: DEFAULT_FEATURE_CAP,
        }
    }

    pub fn with_scale(mut self, scale: ScaleConfig) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_partition(mut self, partition: PartitionSpec) -> Self {
        self.partition = partition;
        self
    }
}

#[derive(Debug, Clone)]
enum Entry {
    Ready { prepared: Prepared, model: usize },
    Failed(String),
}

/// A method fitted to every series of a training set.
#[derive(Debug, Clone)]
pub struct FittedMethod {
    pub models: Vec<FittedModel>,
    pub partition: Option<Partition>,
    /// Series whose local AR fit fell back to the naive forecast.
    pub fallbacks: Vec<String>,
    entries: Vec<Entry>,
}

impl FittedMethod {
    /// The model and preparation used for series `idx` of the training set.
    pub fn model_for(&self, idx: usize) -> Result<(&FittedModel, &Prepared)> {
        match &self.entries[idx] {
            Entry::Ready { prepared, model } => Ok((&self.models[*model], prepared)),
            Entry::Failed(msg) => Err(Error::Usage(msg.clone())),
        }
    }
}

pub fn fit_method(train: &TimeSeriesSet, method: &Method) -> Result<FittedMethod> {
    let prepared: Vec<Result<Prepared>> =
        train.series().par_iter().map(|s| prepare(s, &method.scale)).collect();

    if method.spec.is_global() {
        let keep: Vec<usize> = (0..train.len()).filter(|&i| prepared[i].is_ok()).collect();
        if keep.is_empty() {
            return Err(Error::Param("no series survived preprocessing".into()));
        }
        let subset = TimeSeriesSet::new(keep.iter().map(|&i| train.series()[i].clone()).collect())?;
        let ready: Vec<Prepared> = keep
            .iter()
            .map(|&i| prepared[i].as_ref().cloned().map_err(|e| Error::Usage(e.to_string())))
            .collect::<Result<_>>()?;
        let partition = match &method.partition {
            PartitionSpec::Trivial => Partition::trivial(&subset),
            PartitionSpec::Atomic => Partition::atomic(&subset),
            PartitionSpec::Random { groups, seed } => random_partition(&subset, *groups, *seed)?,
            PartitionSpec::ByKey(key) => keyed_partition(&subset, key)?,
        };
        let models = fit_partitioned(
            &subset,
            &ready,
            &partition,
            &method.spec,
            method.order,
            method.feature_cap,
        )?;
        let mut ready = ready.into_iter();
        let entries = prepared
            .into_iter()
            .zip(train.iter())
            .map(|(p, s)| match p {
                Ok(_) => Entry::Ready {
                    prepared: ready.next().expect("aligned with keep"),
                    model: partition.group_of(&s.id).expect("assigned"),
                },
                Err(e) => Entry::Failed(e.to_string()),
            })
            .collect();
        return Ok(FittedMethod {
            models,
            partition: Some(partition),
            fallbacks: Vec::new(),
            entries,
        });
    }

    let fitted: Vec<(Result<(Prepared, FittedModel)>, bool)> = prepared
        .into_par_iter()
        .zip(train.series().par_iter())
        .map(|(prep, s)| {
            let prep = match prep {
                Ok(p) => p,
                Err(e) => return (Err(e), false),
            };
            let mut fell_back = false;
            let model = match &method.spec {
                ModelSpec::Naive => Ok(naive()),
                ModelSpec::SNaive => Ok(seasonal_naive(s.season_period)),
                ModelSpec::Theta => fit_theta(&prep.scaled),
                ModelSpec::LocalAr { intercept } => {
                    match fit_local_ar(&prep.scaled, method.order, *intercept) {
                        Err(Error::InsufficientData { .. }) => {
                            fell_back = true;
                            Ok(naive())
                        }
                        other => other,
                    }
                }
                other => Err(Error::Usage(format!("'{other}' is not a local model"))),
            };
            (model.map(|m| (prep, m)), fell_back)
        })
        .collect();

    let mut models = Vec::new();
    let mut entries = Vec::with_capacity(train.len());
    let mut fallbacks = Vec::new();
    for ((res, fell_back), s) in fitted.into_iter().zip(train.iter()) {
        if fell_back {
            fallbacks.push(s.id.clone());
        }
        match res {
            Ok((prepared, model)) => {
                entries.push(Entry::Ready {
                    prepared,
                    model: models.len(),
                });
                models.push(model);
            }
            Err(e) => entries.push(Entry::Failed(e.to_string())),
        }
    }
    Ok(FittedMethod {
        models,
        partition: None,
        fallbacks,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEval {
    pub id: String,
    pub forecasts: Vec<f64>,
    pub actual: Vec<f64>,
    pub mase: f64,
    pub smape: f64,
    pub mae: f64,
    /// Mean scaled one-step in-sample error; `None` when the model has no
    /// in-sample position to predict.
    pub insample_mase: Option<f64>,
    /// Scaled absolute error of the first holdout step.
    pub outsample_onestep_mase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Aggregate {
    pub mase: f64,
    pub smape: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model: String,
    pub order: usize,
    pub partitions: usize,
    pub per_series: Vec<SeriesEval>,
    /// Series excluded from the aggregates, with the reason.
    pub failures: Vec<(String, String)>,
    pub fallbacks: Vec<String>,
    pub aggregate: Aggregate,
    /// Mean in-sample one-step MASE over series that have one.
    pub insample: f64,
    /// Mean first-step holdout MASE over the same series.
    pub outsample_onestep: f64,
    pub gap: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn eval_series(
    model: &FittedModel,
    prepared: &Prepared,
    train: &TimeSeries,
    actual: &[f64],
    seasonal: bool,
) -> Result<SeriesEval> {
    let lag = mase_lag(train, seasonal);
    let forecasts = forecast_recursive(model, train, actual.len(), &prepared.record, &prepared.extras)?;
    let mase_full = mase(&forecasts, actual, &train.values, lag)?;
    let onestep = mase(&forecasts[..1], &actual[..1], &train.values, lag)?;

    let errs = insample_abs_errors(model, &prepared.scaled.values, &prepared.extras)?;
    let insample_mase = if errs.is_empty() {
        None
    } else {
        let num = errs.iter().sum::<f64>() / errs.len() as f64;
        match mean_abs_diff(&prepared.scaled.values, lag) {
            Some(den) if den > 0.0 => Some(num / den),
            _ => return Err(Error::DegenerateMetric),
        }
    };
    Ok(SeriesEval {
        id: train.id.clone(),
        smape: smape(&forecasts, actual)?,
        mae: mae(&forecasts, actual)?,
        mase: mase_full,
        forecasts,
        actual: actual.to_vec(),
        insample_mase,
        outsample_onestep_mase: onestep,
    })
}

/// Fits `method` on the train part and scores it against the holdout.
pub fn evaluate(split: &TrainTestSplit, method: &Method) -> Result<EvalReport> {
    let fitted = fit_method(&split.train, method)?;
    let results: Vec<Result<SeriesEval>> = (0..split.train.len())
        .into_par_iter()
        .map(|i| {
            let (model, prepared) = fitted.model_for(i)?;
            eval_series(
                model,
                prepared,
                &split.train.series()[i],
                split.test_for(i),
                method.scale.seasonal,
            )
        })
        .collect();

    let mut per_series = Vec::new();
    let mut failures = Vec::new();
    for (res, s) in results.into_iter().zip(split.train.iter()) {
        match res {
            Ok(e) => per_series.push(e),
            Err(e) => failures.push((s.id.clone(), e.to_string())),
        }
    }
    let aggregate = Aggregate {
        mase: mean(per_series.iter().map(|e| e.mase)),
        smape: mean(per_series.iter().map(|e| e.smape)),
        mae: mean(per_series.iter().map(|e| e.mae)),
    };
    let with_insample = || per_series.iter().filter(|e| e.insample_mase.is_some());
    let insample = mean(with_insample().filter_map(|e| e.insample_mase));
    let outsample_onestep = mean(with_insample().map(|e| e.outsample_onestep_mase));
    let partitions = fitted
        .partition
        .as_ref()
        .map_or(split.train.len(), Partition::len);
    Ok(EvalReport {
        model: method.spec.to_string(),
        order: if method.spec.uses_order() { method.order } else { 0 },
        partitions,
        per_series,
        failures,
        fallbacks: fitted.fallbacks,
        aggregate,
        insample,
        outsample_onestep,
        gap: outsample_onestep - insample,
    })
}

/// In-sample versus one-step out-of-sample error for several methods; a
/// failing method does not stop the others.
pub fn gap_report(methods: &[Method], split: &TrainTestSplit) -> Vec<(String, Result<EvalReport>)> {
    methods
        .iter()
        .map(|m| (m.spec.to_string(), evaluate(split, m)))
        .collect()
}
