//! Generalization-bound calculators for local, global and partitioned
//! learners with finite hypothesis classes.
//!
//! With probability at least `1 - delta`, `E_out < E_in + t` where
//!
//! ```text
//! t = sqrt((log|H| + ln(2 / delta)) / (2 N K))
//! ```
//!
//! for `K` independent series of effective sample size `N` and a loss in
//! `[0, 1]`. Hypothesis counts are always passed as natural logarithms.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    /// Natural log of the hypothesis count.
    pub log_hyp: f64,
    /// Effective sample size per series.
    pub n: f64,
    pub k: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub t: f64,
    pub query: BoundQuery,
}

impl BoundQuery {
    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::Domain(format!("N must be positive, got {}", self.n)));
        }
        if self.k == 0 {
            return Err(Error::Domain("K must be >= 1".into()));
        }
        if !(self.log_hyp >= 0.0 && self.log_hyp.is_finite()) {
            return Err(Error::Domain(format!(
                "log hypothesis count must be >= 0, got {}",
                self.log_hyp
            )));
        }
        Ok(())
    }
}

pub fn bound_halfwidth(q: BoundQuery) -> Result<BoundResult> {
    q.validate()?;
    let t = ((q.log_hyp + (2.0 / q.delta).ln()) / (2.0 * q.n * q.k as f64)).sqrt();
    Ok(BoundResult { t, query: q })
}

/// Log-size of the product of per-series hypothesis classes.
pub fn local_log_complexity(per_series_log_sizes: &[f64]) -> Result<f64> {
    if per_series_log_sizes.is_empty() {
        return Err(Error::Domain("need at least one series".into()));
    }
    if let Some(bad) = per_series_log_sizes.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::Domain(format!("negative log hypothesis count {bad}")));
    }
    Ok(per_series_log_sizes.iter().sum())
}

/// Global memory whose hypothesis count, at 64 bits per parameter, matches
/// local AR models of the given orders: the sum of the orders.
pub fn memory_equivalent(local_orders: &[usize]) -> usize {
    local_orders.iter().sum()
}

/// Log hypothesis count of an AR model with `params` 64-bit parameters.
pub fn parameter_log_count(params: usize) -> f64 {
    64.0 * params as f64 * std::f64::consts::LN_2
}

/// Bound for a partition with one hypothesis class per group.
pub fn partitioned_bound(
    per_group_log_sizes: &[f64],
    n: f64,
    k: usize,
    delta: f64,
) -> Result<BoundResult> {
    let groups = per_group_log_sizes.len();
    if groups == 0 || groups > k {
        return Err(Error::Domain(format!(
            "partition size {groups} must lie in 1..={k}"
        )));
    }
    bound_halfwidth(BoundQuery {
        log_hyp: local_log_complexity(per_group_log_sizes)?,
        n,
        k,
        delta,
    })
}
