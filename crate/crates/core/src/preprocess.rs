//! Per-series scale normalization.
//!
//! Dividing a series by its in-sample mean absolute (seasonal) difference
//! turns the mean absolute error of the scaled series into the MASE of the
//! original one.

use std::fmt;
use std::str::FromStr;

use crate::dataset::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    #[default]
    None,
    Mase,
    Mean,
}

impl FromStr for ScaleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "mase" => Ok(Self::Mase),
            "mean" => Ok(Self::Mean),
            other => Err(Error::Usage(format!("unknown scale mode '{other}'"))),
        }
    }
}

impl fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Mase => "mase",
            Self::Mean => "mean",
        })
    }
}

/// How series are normalized before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScaleConfig {
    pub mode: ScaleMode,
    /// Use the seasonal difference (lag m) for the MASE denominator.
    pub seasonal: bool,
    /// Append `log(scale)` to every design row of the series.
    pub scale_feature: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRecord {
    pub series_id: String,
    pub mode: ScaleMode,
    pub scale: f64,
}

/// Lag of the MASE denominator for a series.
pub fn mase_lag(series: &TimeSeries, seasonal: bool) -> usize {
    if seasonal && series.season_period > 1 {
        series.season_period
    } else {
        1
    }
}

/// Mean of `|v[t] - v[t - lag]|`. `None` when there are no differences.
pub fn mean_abs_diff(values: &[f64], lag: usize) -> Option<f64> {
    if lag == 0 || values.len() <= lag {
        return None;
    }
    let sum: f64 = values
        .iter()
        .skip(lag)
        .zip(values)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Some(sum / (values.len() - lag) as f64)
}

pub fn fit_scale(series: &TimeSeries, mode: ScaleMode, seasonal: bool) -> Result<ScaleRecord> {
    let scale = match mode {
        ScaleMode::None => 1.0,
        ScaleMode::Mase => {
            let lag = mase_lag(series, seasonal);
            mean_abs_diff(&series.values, lag).ok_or_else(|| Error::InsufficientData {
                series: series.id.clone(),
                msg: format!("MASE scale needs more than {lag} values"),
            })?
        }
        ScaleMode::Mean => {
            series.values.iter().map(|v| v.abs()).sum::<f64>() / series.len() as f64
        }
    };
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::DegenerateScale {
            series: series.id.clone(),
        });
    }
    Ok(ScaleRecord {
        series_id: series.id.clone(),
        mode,
        scale,
    })
}

pub fn apply_scale(series: &TimeSeries, record: &ScaleRecord) -> Result<TimeSeries> {
    check_id(&series.id, record)?;
    Ok(TimeSeries {
        values: series.values.iter().map(|v| v / record.scale).collect(),
        ..series.clone()
    })
}

pub fn invert_scale(forecast: &[f64], record: &ScaleRecord) -> Vec<f64> {
    forecast.iter().map(|v| v * record.scale).collect()
}

/// Constant feature encoding a series' scale.
pub fn scale_feature(record: &ScaleRecord) -> f64 {
    record.scale.ln()
}

/// A series ready for fitting: its scale record, the scaled values and the
/// constant extras its design rows carry.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub record: ScaleRecord,
    pub scaled: TimeSeries,
    pub extras: Vec<f64>,
}

pub fn prepare(series: &TimeSeries, cfg: &ScaleConfig) -> Result<Prepared> {
    let record = fit_scale(series, cfg.mode, cfg.seasonal)?;
    let scaled = apply_scale(series, &record)?;
    let extras = if cfg.scale_feature {
        vec![scale_feature(&record)]
    } else {
        Vec::new()
    };
    Ok(Prepared {
        record,
        scaled,
        extras,
    })
}

fn check_id(id: &str, record: &ScaleRecord) -> Result<()> {
    if id != record.series_id {
        return Err(Error::Usage(format!(
            "scale record for '{}' applied to series '{}'",
            record.series_id, id
        )));
    }
    Ok(())
}
