//! Sets of univariate time series: ingestion, holdout splitting and
//! synthetic generation.
//!
//! Series are stored ragged. Each series carries its own season period and
//! forecast horizon, which default to 1 when no metadata is supplied.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub id: String,
    pub values: Vec<f64>,
    pub season_period: usize,
    pub horizon: usize,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            values,
            season_period: 1,
            horizon: 1,
        }
    }

    pub fn with_meta(mut self, season_period: usize, horizon: usize) -> Self {
        self.season_period = season_period;
        self.horizon = horizon;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Structure {
                series: self.id.clone(),
                msg: "no values".into(),
            });
        }
        if let Some(pos) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Structure {
                series: self.id.clone(),
                msg: format!("non-finite value at position {pos}"),
            });
        }
        if self.season_period == 0 || self.horizon == 0 {
            return Err(Error::Structure {
                series: self.id.clone(),
                msg: "season_period and horizon must be >= 1".into(),
            });
        }
        Ok(())
    }
}

/// An ordered, non-empty collection of series with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSet {
    series: Vec<TimeSeries>,
}

impl TimeSeriesSet {
    pub fn new(series: Vec<TimeSeries>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::Param("a series set needs at least one series".into()));
        }
        let mut seen = HashSet::with_capacity(series.len());
        for s in &series {
            s.validate()?;
            if !seen.insert(s.id.as_str()) {
                return Err(Error::Structure {
                    series: s.id.clone(),
                    msg: "duplicate series id".into(),
                });
            }
        }
        Ok(Self { series })
    }

    /// Concatenates several sets. Ids must stay unique across the inputs.
    pub fn merge(sets: impl IntoIterator<Item = TimeSeriesSet>) -> Result<Self> {
        Self::new(sets.into_iter().flat_map(|s| s.series).collect())
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TimeSeries> {
        self.series.iter()
    }

    pub fn get(&self, id: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.id == id)
    }

    /// Keeps only the series satisfying `keep`. Fails if nothing remains.
    pub fn filter(&self, keep: impl Fn(&TimeSeries) -> bool) -> Result<Self> {
        Self::new(self.series.iter().filter(|s| keep(s)).cloned().collect())
    }

    /// Multiplies every value of every series by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let series = self
            .series
            .iter()
            .map(|s| TimeSeries {
                values: s.values.iter().map(|v| v * c).collect(),
                ..s.clone()
            })
            .collect();
        Self { series }
    }

    pub fn min_len(&self) -> usize {
        self.series.iter().map(TimeSeries::len).min().unwrap_or(0)
    }
}

impl<'a> IntoIterator for &'a TimeSeriesSet {
    type Item = &'a TimeSeries;
    type IntoIter = std::slice::Iter<'a, TimeSeries>;

    fn into_iter(self) -> Self::IntoIter {
        self.series.iter()
    }
}

/// Fixed-origin holdout: the last `horizon` values of every series.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTestSplit {
    pub train: TimeSeriesSet,
    pub test: Vec<Vec<f64>>,
}

impl TrainTestSplit {
    pub fn test_for(&self, idx: usize) -> &[f64] {
        &self.test[idx]
    }
}

pub fn split_holdout(set: &TimeSeriesSet) -> Result<TrainTestSplit> {
    let mut train = Vec::with_capacity(set.len());
    let mut test = Vec::with_capacity(set.len());
    for s in set {
        if s.len() <= s.horizon {
            return Err(Error::InsufficientData {
                series: s.id.clone(),
                msg: format!("length {} does not exceed horizon {}", s.len(), s.horizon),
            });
        }
        let cut = s.len() - s.horizon;
        train.push(TimeSeries {
            values: s.values[..cut].to_vec(),
            ..s.clone()
        });
        test.push(s.values[cut..].to_vec());
    }
    Ok(TrainTestSplit {
        train: TimeSeriesSet { series: train },
        test,
    })
}

/// Reads the long `series_id,index,value` format, with an optional
/// `series_id,season_period,horizon` metadata file.
pub fn load_csv(path: &Path, meta_path: Option<&Path>) -> Result<TimeSeriesSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    expect_header(&mut rdr, &["series_id", "index", "value"])?;

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(i64, f64)>> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "empty series_id".into(),
            });
        }
        let index: i64 = rec[1].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad index '{}'", &rec[1]),
        })?;
        let value: f64 = rec[2].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad value '{}'", &rec[2]),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line,
                msg: format!("non-finite value '{}'", &rec[2]),
            });
        }
        rows.entry(id.clone())
            .or_insert_with(|| {
                order.push(id);
                Vec::new()
            })
            .push((index, value));
    }

    let meta = match meta_path {
        Some(p) => load_meta(p)?,
        None => BTreeMap::new(),
    };
    for id in meta.keys() {
        if !rows.contains_key(id) {
            return Err(Error::Structure {
                series: id.clone(),
                msg: "metadata names a series absent from the data".into(),
            });
        }
    }

    let mut series = Vec::with_capacity(order.len());
    for id in order {
        let mut pts = rows.remove(&id).unwrap_or_default();
        pts.sort_by_key(|&(i, _)| i);
        for w in pts.windows(2) {
            if w[1].0 != w[0].0 + 1 {
                return Err(Error::Structure {
                    series: id,
                    msg: format!("index gap between {} and {}", w[0].0, w[1].0),
                });
            }
        }
        if pts.len() < 2 {
            return Err(Error::InsufficientData {
                series: id,
                msg: format!("{} value(s), need at least 2", pts.len()),
            });
        }
        let (m, h) = meta.get(&id).copied().unwrap_or((1, 1));
        series.push(
            TimeSeries::new(id, pts.into_iter().map(|(_, v)| v).collect()).with_meta(m, h),
        );
    }
    TimeSeriesSet::new(series)
}

fn load_meta(path: &Path) -> Result<BTreeMap<String, (usize, usize)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    expect_header(&mut rdr, &["series_id", "season_period", "horizon"])?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let parse_pos = |s: &str, what: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(Error::Parse {
                    line,
                    msg: format!("{what} must be a positive integer, got '{s}'"),
                }),
            }
        };
        let m = parse_pos(&rec[1], "season_period")?;
        let h = parse_pos(&rec[2], "horizon")?;
        if out.insert(rec[0].to_string(), (m, h)).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate metadata for '{}'", &rec[0]),
            });
        }
    }
    Ok(out)
}

fn expect_header<R: std::io::Read>(rdr: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(csv_err)?;
    let got: Vec<&str> = headers.iter().collect();
    if got != want {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header '{}', found '{}'", want.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            msg: format!("{other:?}"),
        },
    }
}

/// Writes the long format read by [`load_csv`]. Values use the shortest
/// decimal text that round-trips.
pub fn write_csv(set: &TimeSeriesSet, path: &Path) -> Result<()> {
    let mut out = String::from("series_id,index,value\n");
    for s in set {
        for (i, v) in s.values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", s.id, i, v));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_meta_csv(set: &TimeSeriesSet, path: &Path) -> Result<()> {
    let mut out = String::from("series_id,season_period,horizon\n");
    for s in set {
        out.push_str(&format!("{},{},{}\n", s.id, s.season_period, s.horizon));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    /// `v[t+1] = phi * v[t] + noise`
    Ar1 { phi: f64 },
    /// `amplitude * sin(2 pi t / period) + noise`
    Seasonal { period: usize, amplitude: f64 },
    /// A random period-`period` profile per series, drawn uniformly from
    /// `[-amplitude, amplitude]`, plus an AR(1) component driven by the noise.
    Mixed { phi: f64, period: usize, amplitude: f64 },
    /// `v[t+1] = r * v[t] * (1 - v[t]) + noise`, started in (0.1, 0.9).
    QuadraticMap { r: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub count: usize,
    pub length: usize,
    pub kind: GeneratorKind,
    pub noise_sd: f64,
    pub seed: u64,
    /// Initial value for AR(1) series; drawn from U(-10, 10) per series when unset.
    pub start: Option<f64>,
    pub horizon: usize,
    pub id_prefix: String,
}

impl GeneratorSpec {
    pub fn new(count: usize, length: usize, kind: GeneratorKind, noise_sd: f64, seed: u64) -> Self {
        Self {
            count,
            length,
            kind,
            noise_sd,
            seed,
            start: None,
            horizon: 1,
            id_prefix: "s".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Param("count must be >= 1".into()));
        }
        if self.length < 4 {
            return Err(Error::Param("length must be >= 4".into()));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Param("noise_sd must be finite and >= 0".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Param("horizon must be >= 1".into()));
        }
        match self.kind {
            GeneratorKind::Ar1 { phi } | GeneratorKind::Mixed { phi, .. } if !(phi.abs() < 1.0) => {
                Err(Error::Param(format!(
                    "|phi| = {} >= 1: nonstationary generator refused",
                    phi.abs()
                )))
            }
            GeneratorKind::Seasonal { period, .. } | GeneratorKind::Mixed { period, .. }
                if period == 0 =>
            {
                Err(Error::Param("period must be >= 1".into()))
            }
            GeneratorKind::QuadraticMap { r } if !(r > 0.0 && r <= 4.0) => {
                Err(Error::Param(format!("quadratic map needs 0 < r <= 4, got {r}")))
            }
            _ => Ok(()),
        }
    }
}

/// Deterministic synthetic set; a pure function of `spec` including the seed.
pub fn gen_synthetic(spec: &GeneratorSpec) -> Result<TimeSeriesSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::Param(e.to_string()))?;
    let width = (spec.count - 1).to_string().len();
    let mut series = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let eps = |rng: &mut ChaCha8Rng| {
            if spec.noise_sd > 0.0 {
                noise.sample(rng)
            } else {
                0.0
            }
        };
        let (values, period) = match spec.kind {
            GeneratorKind::Ar1 { phi } => {
                let mut v = spec.start.unwrap_or_else(|| rng.random_range(-10.0..10.0));
                let mut out = Vec::with_capacity(spec.length);
                for _ in 0..spec.length {
                    out.push(v);
                    v = phi * v + eps(&mut rng);
                }
                (out, 1)
            }
            GeneratorKind::Seasonal { period, amplitude } => {
                let out = (0..spec.length)
                    .map(|t| amplitude * (2.0 * PI * t as f64 / period as f64).sin() + eps(&mut rng))
                    .collect();
                (out, period)
            }
            GeneratorKind::Mixed {
                phi,
                period,
                amplitude,
            } => {
                let profile: Vec<f64> = if amplitude > 0.0 {
                    let u = Uniform::new_inclusive(-amplitude, amplitude)
                        .map_err(|e| Error::Param(e.to_string()))?;
                    (0..period).map(|_| u.sample(&mut rng)).collect()
                } else {
                    vec![0.0; period]
                };
                let mut x = 0.0;
                let mut out = Vec::with_capacity(spec.length);
                for t in 0..spec.length {
                    out.push(profile[t % period] + x);
                    x = phi * x + eps(&mut rng);
                }
                (out, period)
            }
            GeneratorKind::QuadraticMap { r } => {
                let mut v: f64 = rng.random_range(0.1..0.9);
                let mut out = Vec::with_capacity(spec.length);
                for _ in 0..spec.length {
                    out.push(v);
                    v = r * v * (1.0 - v) + eps(&mut rng);
                }
                (out, 1)
            }
        };
        let id = format!("{}{:0width$}", spec.id_prefix, i, width = width);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Param(format!("generator diverged for series {id}")));
        }
        series.push(TimeSeries::new(id, values).with_meta(period, spec.horizon));
    }
    TimeSeriesSet::new(series)
}
