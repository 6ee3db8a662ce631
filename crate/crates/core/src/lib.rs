//! Global forecasting of sets of time series.
//!
//! A single autoregressive function is fitted on the pooled lag embeddings
//! of every series in a set and used to forecast each of them. The crate
//! also provides local baselines, random and keyed partitioning of the set,
//! forecast accuracy metrics, sweep runners and calculators for the
//! Hoeffding-style generalization bounds that compare local and global
//! approaches.

pub mod bounds;
pub mod dataset;
pub mod embed;
pub mod error;
pub mod evaluate;
pub mod experiment;
pub mod linalg;
pub mod models;
pub mod partition;
pub mod preprocess;

pub use dataset::{TimeSeries, TimeSeriesSet, TrainTestSplit};
pub use embed::DesignMatrix;
pub use error::{Error, Result};
pub use evaluate::{EvalReport, Method, PartitionSpec};
pub use models::{FittedModel, ModelSpec};
pub use preprocess::{ScaleConfig, ScaleMode, ScaleRecord};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
