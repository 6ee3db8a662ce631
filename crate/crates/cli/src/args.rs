//! Command-line definitions. Every argument struct is serializable so the
//! parsed invocation can be echoed into the run manifest.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "globalts", version, about = "Global autoregressive forecasting experiments")]
pub struct Cli {
    /// Log verbosity: -v info, -vv debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    #[serde(skip)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Fit each model at every memory level and score it on the holdout.
    SweepMemory(SweepArgs),
    /// Compare model classes (default: linear, poly2, poly3, mlp) over lags.
    SweepModel(SweepArgs),
    /// Fit one global model per group of a random or keyed partition.
    SweepPartition(PartitionSweepArgs),
    /// Evaluate a single method.
    Evaluate(EvaluateArgs),
    /// In-sample versus one-step out-of-sample error per method.
    GapReport(GapArgs),
    /// Generalization bound half-widths.
    Bounds(BoundsArgs),
    /// Write a synthetic data set.
    GenSynthetic(GenArgs),
    /// Global linear coefficients by lag for each memory level.
    CoefficientDump(CoefficientArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Long-format CSV with header series_id,index,value.
    #[arg(long)]
    pub data: PathBuf,
    /// Optional CSV with header series_id,season_period,horizon.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    None,
    Mase,
    Mean,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScaleArgs {
    #[arg(long, value_enum, default_value = "mase")]
    pub scale: ScaleArg,
    /// Use seasonal differences in the MASE denominator.
    #[arg(long)]
    pub seasonal_scale: bool,
    /// Append the log of each series' scale as an input feature.
    #[arg(long)]
    pub scale_feature: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Fit linear and polynomial models without an intercept.
    #[arg(long)]
    pub no_intercept: bool,
    /// Replace the degree of linear/polynomial models (1, 2 or 3).
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub mlp_seed: u64,
    #[arg(long)]
    pub mlp_epochs: Option<usize>,
    #[arg(long)]
    pub mlp_patience: Option<usize>,
    /// Maximum number of polynomial features.
    #[arg(long, default_value_t = globalts::embed::DEFAULT_FEATURE_CAP)]
    pub feature_cap: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Comma-separated model names.
    #[arg(long, alias = "model", value_delimiter = ',')]
    pub models: Vec<String>,
    /// Lag list ("1,2,12") or inclusive range ("1..24"); defaults to every
    /// lag the shortest series allows.
    #[arg(long, alias = "lag")]
    pub lags: Option<LagList>,
    /// For each lag keep only series whose train part is longer than it.
    #[arg(long)]
    pub min_length_filter: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub scale: ScaleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PartitionSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    /// Comma-separated numbers of random groups.
    #[arg(long, value_delimiter = ',', default_value = "1,10", conflicts_with = "partition_key")]
    pub partitions: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub partition_seed: u64,
    /// Group series by metadata instead: season_period or horizon.
    #[arg(long)]
    pub partition_key: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "linear")]
    pub model: String,
    /// Autoregressive order; required by models that use one.
    #[arg(long)]
    pub lag: Option<usize>,
    /// Number of random groups for a partitioned global fit.
    #[arg(long, conflicts_with = "partition_key")]
    pub partitions: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub partition_seed: u64,
    #[arg(long)]
    pub partition_key: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub scale: ScaleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model_opts: ModelArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, alias = "model", value_delimiter = ',', default_value = "linear,local-ar,naive")]
    pub models: Vec<String>,
    #[arg(long)]
    pub lag: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub scale: ScaleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    /// Natural log of the hypothesis count of a single global class.
    #[arg(long)]
    pub log_hyp: Option<f64>,
    /// File with one per-series log hypothesis count per line.
    #[arg(long)]
    pub per_series_log_hyp: Option<PathBuf>,
    /// File with one local AR order per line; compares the local models
    /// against the global model of the same total memory.
    #[arg(long)]
    pub memory_orders: Option<PathBuf>,
    /// Effective sample sizes per series (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<f64>,
    /// Number of series; taken from the input file when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Also write the table as bounds.csv with a manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Ar1,
    Seasonal,
    Mixed,
    Quadratic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 100)]
    pub length: usize,
    #[arg(long, default_value_t = 0.5)]
    pub phi: f64,
    #[arg(long, default_value_t = 12)]
    pub period: usize,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Quadratic map parameter.
    #[arg(long, default_value_t = 3.9)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    /// Fixed initial value for AR(1) series.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    #[arg(long, default_value = "s")]
    pub prefix: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoefficientArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, alias = "lag")]
    pub lags: LagList,
    #[arg(long)]
    pub no_intercept: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub scale: ScaleArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Lags given as a comma list, an inclusive range `a..b`, or a mix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct LagList(pub Vec<usize>);

impl FromStr for LagList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut lags = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let num = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("bad lag '{x}' in '{s}'"))
            };
            if let Some((a, b)) = part.split_once("..") {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b {
                    return Err(format!("empty lag range '{part}'"));
                }
                lags.extend(a..=b);
            } else {
                lags.push(num(part)?);
            }
        }
        if lags.is_empty() {
            return Err("lag list is empty".into());
        }
        if lags.contains(&0) {
            return Err("lags must be >= 1".into());
        }
        Ok(Self(lags))
    }
}
