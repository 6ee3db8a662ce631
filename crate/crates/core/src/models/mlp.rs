//! Rectifier MLP regressor trained with Adam on mean absolute error, with
//! early stopping on a held-out slice of the design matrix.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FittedModel, ModelKind, Params, TrainingMeta};
use crate::embed::DesignMatrix;
use crate::error::{Error, Result};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    /// Hidden rectifier layers; a linear output unit follows them.
    pub layers: usize,
    pub width: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub validation_fraction: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            layers: 5,
            width: 32,
            learning_rate: 0.001,
            batch_size: 1024,
            validation_fraction: 0.15,
            patience: 20,
            max_epochs: 500,
            seed: 0,
        }
    }
}

impl MlpConfig {
    fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.width == 0 {
            return Err(Error::Param("MLP needs at least one hidden unit".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Param("batch_size must be >= 1".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Param("validation_fraction must lie in (0, 1)".into()));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Param("max_epochs and patience must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Param("learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Fully connected network with all parameters in one flat vector.
///
/// Layer `l` maps `sizes[l]` inputs to `sizes[l + 1]` outputs and stores its
/// row-major weight matrix followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNet {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

impl MlpNet {
    /// Glorot-uniform weights, zero biases.
    pub fn new(input_dim: usize, layers: usize, width: usize, rng: &mut impl Rng) -> Self {
        let mut sizes = vec![input_dim];
        sizes.extend(std::iter::repeat_n(width, layers));
        sizes.push(1);
        let mut params = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Self { sizes, params }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    fn offsets(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        // (fan_in, fan_out, offset of weights)
        self.sizes.windows(2).scan(0usize, |off, w| {
            let here = *off;
            *off += w[0] * w[1] + w[1];
            Some((w[0], w[1], here))
        })
    }

    /// Forward pass keeping every layer's pre-activation.
    fn forward(&self, x: &[f64], pre: &mut Vec<Vec<f64>>) -> f64 {
        pre.resize(self.layer_count(), Vec::new());
        let last = self.layer_count() - 1;
        let mut input: Vec<f64> = x.to_vec();
        for (l, (fan_in, fan_out, off)) in self.offsets().enumerate() {
            let w = &self.params[off..off + fan_in * fan_out];
            let b = &self.params[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
            let z = &mut pre[l];
            z.clear();
            z.extend((0..fan_out).map(|o| {
                b[o] + w[o * fan_in..(o + 1) * fan_in]
                    .iter()
                    .zip(&input)
                    .map(|(a, c)| a * c)
                    .sum::<f64>()
            }));
            if l < last {
                input.clear();
                input.extend(z.iter().map(|v| v.max(0.0)));
            }
        }
        pre[last][0]
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut pre = Vec::new();
        self.forward(x, &mut pre)
    }

    /// Mean absolute error over `rows` of a row-major input matrix.
    pub fn mae(&self, xs: &[f64], ys: &[f64], rows: &[usize]) -> f64 {
        let d = self.input_dim();
        let mut pre = Vec::new();
        let total: f64 = rows
            .iter()
            .map(|&r| (self.forward(&xs[r * d..(r + 1) * d], &mut pre) - ys[r]).abs())
            .sum();
        total / rows.len() as f64
    }

    /// Mean absolute error over `rows` and its gradient, written to `grad`.
    pub fn loss_and_grad(&self, xs: &[f64], ys: &[f64], rows: &[usize], grad: &mut [f64]) -> f64 {
        let d = self.input_dim();
        let n = rows.len() as f64;
        let layers: Vec<(usize, usize, usize)> = self.offsets().collect();
        let last = layers.len() - 1;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut pre = Vec::new();
        let mut delta = Vec::new();
        let mut next = Vec::new();
        let mut loss = 0.0;
        for &r in rows {
            let x = &xs[r * d..(r + 1) * d];
            let out = self.forward(x, &mut pre);
            let resid = out - ys[r];
            loss += resid.abs();
            delta.clear();
            delta.push(resid.signum() * f64::from(resid != 0.0) / n);
            for l in (0..=last).rev() {
                let (fan_in, fan_out, off) = layers[l];
                let input = |i: usize| if l == 0 { x[i] } else { pre[l - 1][i].max(0.0) };
                for o in 0..fan_out {
                    let dz = delta[o];
                    if dz == 0.0 {
                        continue;
                    }
                    let gw = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                    for (i, g) in gw.iter_mut().enumerate() {
                        *g += dz * input(i);
                    }
                    grad[off + fan_in * fan_out + o] += dz;
                }
                if l > 0 {
                    let w = &self.params[off..off + fan_in * fan_out];
                    next.clear();
                    next.extend((0..fan_in).map(|i| {
                        if pre[l - 1][i] > 0.0 {
                            (0..fan_out).map(|o| w[o * fan_in + i] * delta[o]).sum()
                        } else {
                            0.0
                        }
                    }));
                    std::mem::swap(&mut delta, &mut next);
                }
            }
        }
        loss / n
    }

    /// Distance of the instance from the loss's nondifferentiable points:
    /// the smallest |pre-activation| of any hidden unit and |residual|.
    pub fn kink_margin(&self, xs: &[f64], ys: &[f64], rows: &[usize]) -> f64 {
        let d = self.input_dim();
        let mut pre = Vec::new();
        let mut margin = f64::INFINITY;
        for &r in rows {
            let out = self.forward(&xs[r * d..(r + 1) * d], &mut pre);
            margin = margin.min((out - ys[r]).abs());
            for z in &pre[..pre.len() - 1] {
                margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
            }
        }
        margin
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let lr_t = self.lr * (1.0 - BETA2.powi(self.t)).sqrt() / (1.0 - BETA1.powi(self.t));
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *p -= lr_t * *m / (v.sqrt() + ADAM_EPS);
        }
    }
}

/// Trains on the first 85% of a seeded shuffle of the rows and early-stops
/// on the rest. The best-validation weights are returned.
pub fn fit_mlp(matrix: &DesignMatrix, cfg: &MlpConfig) -> Result<FittedModel> {
    cfg.validate()?;
    let rows = matrix.rows();
    if rows < 2 {
        return Err(Error::InsufficientData {
            series: "<pooled>".into(),
            msg: format!("MLP needs at least 2 rows, got {rows}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut perm: Vec<usize> = (0..rows).collect();
    perm.shuffle(&mut rng);
    let n_val = ((rows as f64 * cfg.validation_fraction).ceil() as usize).clamp(1, rows - 1);
    let val_rows = perm.split_off(rows - n_val);
    let mut train_rows = perm;

    let xs = matrix.features();
    let ys = matrix.targets();
    let mut net = MlpNet::new(matrix.ncols(), cfg.layers, cfg.width, &mut rng);
    let mut adam = Adam::new(net.params.len(), cfg.learning_rate);
    let mut grad = vec![0.0; net.params.len()];

    let mut best = net.clone();
    let mut best_loss = f64::INFINITY;
    let mut stale = 0;
    let mut epochs_run = 0;
    for epoch in 1..=cfg.max_epochs {
        epochs_run = epoch;
        train_rows.shuffle(&mut rng);
        for batch in train_rows.chunks(cfg.batch_size) {
            let loss = net.loss_and_grad(xs, ys, batch, &mut grad);
            if !loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    msg: "non-finite training loss".into(),
                });
            }
            adam.step(&mut net.params, &grad);
        }
        let val = net.mae(xs, ys, &val_rows);
        if !val.is_finite() {
            return Err(Error::Training {
                epoch,
                msg: "non-finite validation loss".into(),
            });
        }
        if val < best_loss {
            best_loss = val;
            best.params.copy_from_slice(&net.params);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    log::debug!("mlp stopped after {epochs_run} epochs, validation MAE {best_loss}");
    Ok(FittedModel {
        kind: ModelKind::Mlp,
        order: matrix.order(),
        params: Params::Mlp {
            net: best,
            feature_map: matrix.feature_map(),
        },
        training: Some(TrainingMeta {
            seed: cfg.seed,
            epochs_run,
            validation_loss: best_loss,
        }),
    })
}
