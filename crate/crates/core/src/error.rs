use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("series '{series}': {msg}")]
    Structure { series: String, msg: String },

    #[error("series '{series}': insufficient data ({msg})")]
    InsufficientData { series: String, msg: String },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("series '{series}': degenerate scale (zero denominator)")]
    DegenerateScale { series: String },

    #[error("zero MASE denominator: in-sample differences are all zero")]
    DegenerateMetric,

    #[error("usage error: {0}")]
    Usage(String),

    #[error("series '{series}': cannot embed length {len} at order {order}")]
    EmptyEmbedding {
        series: String,
        order: usize,
        len: usize,
    },

    #[error("incompatible design matrices: {0}")]
    Incompatible(String),

    #[error("polynomial expansion needs {required} features, cap is {cap}")]
    FeatureCap { required: usize, cap: usize },

    #[error("empty design matrix")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("training diverged at epoch {epoch}: {msg}")]
    Training { epoch: usize, msg: String },

    #[error("non-finite forecast at step {step}")]
    Instability { step: usize },

    #[error("partition error: {0}")]
    Partition(String),

    #[error("domain error: {0}")]
    Domain(String),
}
