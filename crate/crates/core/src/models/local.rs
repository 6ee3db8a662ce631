use super::{fit_linear, FittedModel, ModelKind, Params};
use crate::dataset::TimeSeries;
use crate::embed::embed_series;
use crate::error::{Error, Result};

pub fn naive() -> FittedModel {
    FittedModel {
        kind: ModelKind::Naive,
        order: 0,
        params: Params::Naive,
        training: None,
    }
}

pub fn seasonal_naive(period: usize) -> FittedModel {
    FittedModel {
        kind: ModelKind::SNaive,
        order: 0,
        params: Params::SNaive {
            period: period.max(1),
        },
        training: None,
    }
}

/// Per-series linear AR(p); requires more than `2p` training values.
pub fn fit_local_ar(series: &TimeSeries, p: usize, intercept: bool) -> Result<FittedModel> {
    if series.len() <= 2 * p {
        return Err(Error::InsufficientData {
            series: series.id.clone(),
            msg: format!("local AR({p}) needs more than {} values, got {}", 2 * p, series.len()),
        });
    }
    let mut model = fit_linear(&embed_series(series, p)?, intercept)?;
    model.kind = ModelKind::LocalAr;
    Ok(model)
}

/// Smoothing constants searched by [`fit_theta`]: 0.01, 0.02, ..., 1.00.
pub fn theta_alpha_grid() -> impl Iterator<Item = f64> {
    (1..=100).map(|i| i as f64 / 100.0)
}

/// Simple exponential smoothing run; returns the terminal level and the
/// in-sample one-step squared error.
fn ses(values: &[f64], alpha: f64) -> (f64, f64) {
    let mut level = values[0];
    let mut sse = 0.0;
    for &y in &values[1..] {
        let err = y - level;
        sse += err * err;
        level += alpha * err;
    }
    (level, sse)
}

fn ls_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let tbar = (n - 1.0) / 2.0;
    let ybar = values.iter().sum::<f64>() / n;
    let (num, den) = values
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(num, den), (t, y)| {
            let dt = t as f64 - tbar;
            (num + dt * (y - ybar), den + dt * dt)
        });
    num / den
}

/// Theta method as simple exponential smoothing with drift equal to half the
/// least-squares trend slope.
pub fn fit_theta(series: &TimeSeries) -> Result<FittedModel> {
    let v = &series.values;
    if v.len() < 3 {
        return Err(Error::InsufficientData {
            series: series.id.clone(),
            msg: format!("theta needs at least 3 values, got {}", v.len()),
        });
    }
    let drift = ls_slope(v) / 2.0;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for alpha in theta_alpha_grid() {
        let (level, sse) = ses(v, alpha);
        if sse < best.0 {
            best = (sse, alpha, level);
        }
    }
    let (_, alpha, level) = best;
    Ok(FittedModel {
        kind: ModelKind::Theta,
        order: 0,
        params: Params::Theta {
            level,
            drift,
            alpha,
        },
        training: None,
    })
}
