//! Least squares by streaming QR.
//!
//! Rows of `[A | y]` are accumulated in blocks and folded into a running
//! triangular factor, so a pooled design matrix never has to be factored in
//! one piece. The small triangular system is then solved through its SVD,
//! which yields the minimum-norm solution when `A` is rank deficient.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MIN_BLOCK_ROWS: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub coef: Vec<f64>,
    pub rank: usize,
    /// Residual 2-norm `||A x - y||`.
    pub residual_norm: f64,
}

impl LstsqSolution {
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.coef.len()
    }
}

/// Incremental QR of `[A | y]`.
#[derive(Debug, Clone)]
pub struct QrAccumulator {
    ncols: usize,
    /// Current triangular factor of the augmented matrix, row-major.
    r: Vec<f64>,
    r_rows: usize,
    pending: Vec<f64>,
    pending_rows: usize,
    block_rows: usize,
    total_rows: usize,
}

impl QrAccumulator {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            r: Vec::new(),
            r_rows: 0,
            pending: Vec::new(),
            pending_rows: 0,
            block_rows: MIN_BLOCK_ROWS.max(2 * (ncols + 1)),
            total_rows: 0,
        }
    }

    pub fn total_rows(&self) -> usize {
        self.total_rows
    }

    pub fn push_row(&mut self, x: &[f64], y: f64) {
        debug_assert_eq!(x.len(), self.ncols);
        self.pending.extend_from_slice(x);
        self.pending.push(y);
        self.pending_rows += 1;
        self.total_rows += 1;
        if self.pending_rows >= self.block_rows {
            self.compress();
        }
    }

    fn compress(&mut self) {
        if self.pending_rows == 0 {
            return;
        }
        let w = self.ncols + 1;
        let rows = self.r_rows + self.pending_rows;
        let stacked = DMatrix::from_fn(rows, w, |i, j| {
            if i < self.r_rows {
                self.r[i * w + j]
            } else {
                self.pending[(i - self.r_rows) * w + j]
            }
        });
        let r = stacked.qr().r();
        self.r_rows = r.nrows();
        self.r = (0..r.nrows())
            .flat_map(|i| (0..w).map(move |j| (i, j)))
            .map(|(i, j)| r[(i, j)])
            .collect();
        self.pending.clear();
        self.pending_rows = 0;
    }

    pub fn solve(mut self) -> Result<LstsqSolution> {
        if self.total_rows == 0 || self.ncols == 0 {
            return Err(Error::EmptyMatrix);
        }
        self.compress();
        let n = self.ncols;
        let w = n + 1;
        let at = |i: usize, j: usize| if i < self.r_rows { self.r[i * w + j] } else { 0.0 };
        let r = DMatrix::from_fn(n, n, &at);
        let z = DVector::from_fn(n, |i, _| at(i, n));
        let tail = if self.r_rows > n { at(n, n).abs() } else { 0.0 };

        let svd = r.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let tol = smax * self.total_rows.max(n) as f64 * f64::EPSILON;
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        let x = if smax > 0.0 {
            svd.solve(&z, tol).map_err(|e| Error::Domain(e.to_string()))?
        } else {
            DVector::zeros(n)
        };
        // Residual within the row space of R, plus what lies outside it.
        let inner = (&r * &x - &z).norm();
        Ok(LstsqSolution {
            coef: x.iter().copied().collect(),
            rank,
            residual_norm: inner.hypot(tail),
        })
    }
}

/// Minimum-norm least squares for a row-major `rows x ncols` matrix.
pub fn lstsq(a: &[f64], ncols: usize, y: &[f64]) -> Result<LstsqSolution> {
    if ncols == 0 || y.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if a.len() != ncols * y.len() {
        return Err(Error::Dimension {
            expected: ncols * y.len(),
            got: a.len(),
        });
    }
    let mut acc = QrAccumulator::new(ncols);
    for (row, &t) in a.chunks_exact(ncols).zip(y) {
        acc.push_row(row, t);
    }
    acc.solve()
}
