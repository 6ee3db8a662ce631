//! One-step-ahead predictors behind a single fitted-model type.
//!
//! Global models (linear, polynomial, MLP) are fitted on a pooled design
//! matrix. Local baselines (naive, seasonal naive, theta, per-series AR) are
//! fitted on one series at a time.

mod local;
mod mlp;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use local::{fit_local_ar, fit_theta, naive, seasonal_naive, theta_alpha_grid};
pub use mlp::{fit_mlp, MlpConfig, MlpNet};

use crate::embed::{self, DesignMatrix, FeatureMap};
use crate::error::{Error, Result};
use crate::linalg::QrAccumulator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Linear,
    Poly(usize),
    Mlp,
    Naive,
    SNaive,
    Theta,
    LocalAr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    /// Affine map on featurized windows; used by linear, poly and local AR.
    Affine {
        intercept: f64,
        weights: Vec<f64>,
        feature_map: FeatureMap,
        rank: usize,
    },
    Mlp {
        net: MlpNet,
        feature_map: FeatureMap,
    },
    Naive,
    SNaive {
        period: usize,
    },
    Theta {
        level: f64,
        drift: f64,
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub validation_loss: f64,
}

/// An immutable trained predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub kind: ModelKind,
    /// Memory: number of past values consumed. 0 for naive, snaive and theta.
    pub order: usize,
    pub params: Params,
    pub training: Option<TrainingMeta>,
}

impl FittedModel {
    /// `[intercept, w_1, ..., w_d]` for affine models.
    pub fn coefficients(&self) -> Option<Vec<f64>> {
        match &self.params {
            Params::Affine {
                intercept, weights, ..
            } => Some(std::iter::once(*intercept).chain(weights.iter().copied()).collect()),
            _ => None,
        }
    }

    /// True when the least-squares system behind an affine model lacked full
    /// column rank and the minimum-norm solution was returned.
    pub fn rank_deficient(&self) -> bool {
        match &self.params {
            Params::Affine { weights, rank, .. } => *rank < weights.len() + 1,
            _ => false,
        }
    }

    pub fn feature_map(&self) -> Option<FeatureMap> {
        match &self.params {
            Params::Affine { feature_map, .. } | Params::Mlp { feature_map, .. } => {
                Some(*feature_map)
            }
            _ => None,
        }
    }

    /// Number of constant extras expected after the window.
    pub fn extras(&self) -> usize {
        self.feature_map().map_or(0, |f| f.extras)
    }

    pub fn is_local(&self) -> bool {
        matches!(
            self.kind,
            ModelKind::Naive | ModelKind::SNaive | ModelKind::Theta | ModelKind::LocalAr
        )
    }

    /// Forecast `h` steps ahead directly from a theta model's state.
    pub fn theta_forecast(&self, h: usize) -> Option<f64> {
        match self.params {
            Params::Theta { level, drift, .. } => Some(level + h as f64 * drift),
            _ => None,
        }
    }
}

fn featurize(window: &[f64], extras: &[f64], map: FeatureMap, out: &mut Vec<f64>) {
    out.clear();
    if map.degree == 1 {
        out.extend_from_slice(window);
    } else {
        embed::push_poly_features(window, map.degree, out);
    }
    out.extend_from_slice(extras);
}

/// One-step prediction from the most recent `window` (oldest first).
pub fn predict_one(model: &FittedModel, window: &[f64], extras: &[f64]) -> Result<f64> {
    let check_window = |need: usize| {
        if window.len() != need {
            Err(Error::Dimension {
                expected: need,
                got: window.len(),
            })
        } else {
            Ok(())
        }
    };
    let check_extras = |map: &FeatureMap| {
        if extras.len() != map.extras {
            Err(Error::Dimension {
                expected: map.extras,
                got: extras.len(),
            })
        } else {
            Ok(())
        }
    };
    match &model.params {
        Params::Affine {
            intercept,
            weights,
            feature_map,
            ..
        } => {
            check_window(model.order)?;
            check_extras(feature_map)?;
            let mut x = Vec::with_capacity(weights.len());
            featurize(window, extras, *feature_map, &mut x);
            Ok(intercept + x.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>())
        }
        Params::Mlp { net, feature_map } => {
            check_window(model.order)?;
            check_extras(feature_map)?;
            let mut x = Vec::with_capacity(feature_map.dim(model.order));
            featurize(window, extras, *feature_map, &mut x);
            Ok(net.predict(&x))
        }
        Params::Naive => window.last().copied().ok_or(Error::Dimension {
            expected: 1,
            got: 0,
        }),
        Params::SNaive { period } => {
            if window.len() < *period {
                return Err(Error::Dimension {
                    expected: *period,
                    got: window.len(),
                });
            }
            Ok(window[window.len() - period])
        }
        Params::Theta { level, drift, .. } => Ok(level + drift),
    }
}

/// Least-squares fit on a design matrix, through orthogonal factorization.
///
/// The intercept, when enabled, is an implicit leading column of ones. The
/// minimum-norm solution is returned for rank-deficient systems.
pub fn fit_linear(matrix: &DesignMatrix, intercept: bool) -> Result<FittedModel> {
    if matrix.rows() == 0 || matrix.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let d = matrix.ncols();
    let width = d + usize::from(intercept);
    let mut acc = QrAccumulator::new(width);
    let mut row = Vec::with_capacity(width);
    for (x, &y) in matrix.row_iter().zip(matrix.targets()) {
        row.clear();
        if intercept {
            row.push(1.0);
        }
        row.extend_from_slice(x);
        acc.push_row(&row, y);
    }
    let sol = acc.solve()?;
    let (b, weights, rank) = if intercept {
        (sol.coef[0], sol.coef[1..].to_vec(), sol.rank)
    } else {
        // the absent intercept counts as a pinned, identified parameter
        (0.0, sol.coef, sol.rank + 1)
    };
    if rank < d + 1 {
        log::warn!(
            "rank-deficient least squares (rank {} of {}), using minimum-norm solution",
            rank,
            d + 1
        );
    }
    let feature_map = matrix.feature_map();
    Ok(FittedModel {
        kind: match feature_map.degree {
            1 => ModelKind::Linear,
            k => ModelKind::Poly(k),
        },
        order: matrix.order(),
        params: Params::Affine {
            intercept: b,
            weights,
            feature_map,
            rank,
        },
        training: None,
    })
}

/// What to fit.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Linear { intercept: bool },
    Poly { degree: usize, intercept: bool },
    Mlp(MlpConfig),
    Naive,
    SNaive,
    Theta,
    LocalAr { intercept: bool },
}

impl ModelSpec {
    /// Global models are fitted on pooled data.
    pub fn is_global(&self) -> bool {
        matches!(self, Self::Linear { .. } | Self::Poly { .. } | Self::Mlp(_))
    }

    /// Whether the model consumes a lag window of the sweep's order.
    pub fn uses_order(&self) -> bool {
        self.is_global() || matches!(self, Self::LocalAr { .. })
    }

    pub fn with_intercept(self, on: bool) -> Self {
        match self {
            Self::Linear { .. } => Self::Linear { intercept: on },
            Self::Poly { degree, .. } => Self::Poly {
                degree,
                intercept: on,
            },
            Self::LocalAr { .. } => Self::LocalAr { intercept: on },
            other => other,
        }
    }

    pub fn feature_count(&self, p: usize, extras: usize) -> usize {
        match self {
            Self::Poly { degree, .. } => embed::poly_feature_count(p, *degree) + extras,
            Self::Naive | Self::SNaive | Self::Theta => 0,
            _ => p + extras,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { .. } => f.write_str("linear"),
            Self::Poly { degree, .. } => write!(f, "poly{degree}"),
            Self::Mlp(_) => f.write_str("mlp"),
            Self::Naive => f.write_str("naive"),
            Self::SNaive => f.write_str("snaive"),
            Self::Theta => f.write_str("theta"),
            Self::LocalAr { .. } => f.write_str("local-ar"),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "linear" => Self::Linear { intercept: true },
            "poly2" => Self::Poly {
                degree: 2,
                intercept: true,
            },
            "poly3" => Self::Poly {
                degree: 3,
                intercept: true,
            },
            "mlp" => Self::Mlp(MlpConfig::default()),
            "naive" => Self::Naive,
            "snaive" => Self::SNaive,
            "theta" => Self::Theta,
            "local-ar" => Self::LocalAr { intercept: true },
            other => return Err(Error::Usage(format!("unknown model '{other}'"))),
        })
    }
}

/// Fits a global model on a raw pooled matrix: polynomial expansion first,
/// then the per-series constant extras.
pub fn fit_global(
    spec: &ModelSpec,
    raw: &DesignMatrix,
    extras: Option<&HashMap<String, Vec<f64>>>,
    feature_cap: usize,
) -> Result<FittedModel> {
    let expanded;
    let base = match spec {
        ModelSpec::Poly { degree, .. } => {
            expanded = embed::expand_poly(raw, *degree, feature_cap)?;
            &expanded
        }
        _ => raw,
    };
    let with_extras;
    let matrix = match extras {
        Some(e) => {
            with_extras = embed::append_constant_columns(base, e)?;
            &with_extras
        }
        None => base,
    };
    match spec {
        ModelSpec::Linear { intercept } | ModelSpec::Poly { intercept, .. } => {
            fit_linear(matrix, *intercept)
        }
        ModelSpec::Mlp(cfg) => fit_mlp(matrix, cfg),
        other => Err(Error::Usage(format!("'{other}' is not a global model"))),
    }
}
