//! Lag embedding, pooling and polynomial featurization.
//!
//! A row with provenance `(series, t)` holds the window `v[t-p..t]`, oldest
//! first, and the target `v[t]`. Polynomial maps replace the window with every
//! monomial of total degree `1..=degree` in graded lexicographic order.
//! Per-series constant extras always come last.

use std::collections::HashMap;
use std::sync::Arc;

use crate::dataset::{TimeSeries, TimeSeriesSet};
use crate::error::{Error, Result};

pub const DEFAULT_FEATURE_CAP: usize = 20_000;

/// Shape of a design row: the polynomial degree applied to the lag window
/// (1 = raw lags) and how many constant extras follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureMap {
    pub degree: usize,
    pub extras: usize,
}

impl FeatureMap {
    pub const RAW: FeatureMap = FeatureMap {
        degree: 1,
        extras: 0,
    };

    pub fn dim(&self, order: usize) -> usize {
        poly_feature_count(order, self.degree) + self.extras
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub series: Arc<str>,
    /// Index of the target value inside the source series.
    pub t: usize,
}

/// Dense row-major design matrix with per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    features: Vec<f64>,
    ncols: usize,
    targets: Vec<f64>,
    provenance: Vec<Provenance>,
    order: usize,
    feature_map: FeatureMap,
}

impl DesignMatrix {
    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.features[r * self.ncols..(r + 1) * self.ncols]
    }

    pub fn row_iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.rows()).map(move |r| self.row(r))
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn feature_map(&self) -> FeatureMap {
        self.feature_map
    }

    /// Keeps the rows at `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> DesignMatrix {
        let mut features = Vec::with_capacity(idx.len() * self.ncols);
        for &r in idx {
            features.extend_from_slice(self.row(r));
        }
        DesignMatrix {
            features,
            ncols: self.ncols,
            targets: idx.iter().map(|&r| self.targets[r]).collect(),
            provenance: idx.iter().map(|&r| self.provenance[r].clone()).collect(),
            order: self.order,
            feature_map: self.feature_map,
        }
    }
}

pub fn embed_series(series: &TimeSeries, p: usize) -> Result<DesignMatrix> {
    if p == 0 {
        return Err(Error::Param("embedding order must be >= 1".into()));
    }
    let n = series.len();
    if p >= n {
        return Err(Error::EmptyEmbedding {
            series: series.id.clone(),
            order: p,
            len: n,
        });
    }
    let id: Arc<str> = Arc::from(series.id.as_str());
    let rows = n - p;
    let mut features = Vec::with_capacity(rows * p);
    for w in series.values.windows(p).take(rows) {
        features.extend_from_slice(w);
    }
    Ok(DesignMatrix {
        features,
        ncols: p,
        targets: series.values[p..].to_vec(),
        provenance: (p..n)
            .map(|t| Provenance {
                series: id.clone(),
                t,
            })
            .collect(),
        order: p,
        feature_map: FeatureMap::RAW,
    })
}

/// Stacks matrices row-wise, preserving input order.
pub fn pool(matrices: &[DesignMatrix]) -> Result<DesignMatrix> {
    let first = matrices.first().ok_or(Error::EmptyMatrix)?;
    for m in &matrices[1..] {
        if m.order != first.order || m.feature_map != first.feature_map {
            return Err(Error::Incompatible(format!(
                "order {} / {:?} vs order {} / {:?}",
                first.order, first.feature_map, m.order, m.feature_map
            )));
        }
    }
    let rows: usize = matrices.iter().map(DesignMatrix::rows).sum();
    let mut out = DesignMatrix {
        features: Vec::with_capacity(rows * first.ncols),
        ncols: first.ncols,
        targets: Vec::with_capacity(rows),
        provenance: Vec::with_capacity(rows),
        order: first.order,
        feature_map: first.feature_map,
    };
    for m in matrices {
        out.features.extend_from_slice(&m.features);
        out.targets.extend_from_slice(&m.targets);
        out.provenance.extend(m.provenance.iter().cloned());
    }
    Ok(out)
}

/// Embeds every series of the set at order `p` and pools the result.
pub fn embed_set(set: &TimeSeriesSet, p: usize) -> Result<DesignMatrix> {
    let parts = set
        .iter()
        .map(|s| embed_series(s, p))
        .collect::<Result<Vec<_>>>()?;
    pool(&parts)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Number of monomials of total degree `1..=degree` in `p` variables.
pub fn poly_feature_count(p: usize, degree: usize) -> usize {
    let c = binomial(p + degree, degree) - 1;
    usize::try_from(c).unwrap_or(usize::MAX)
}

/// Appends all monomials of `window` of total degree `1..=degree` to `out`.
pub fn push_poly_features(window: &[f64], degree: usize, out: &mut Vec<f64>) {
    out.extend_from_slice(window);
    let p = window.len();
    if degree >= 2 {
        for i in 0..p {
            for j in i..p {
                out.push(window[i] * window[j]);
            }
        }
    }
    if degree >= 3 {
        for i in 0..p {
            for j in i..p {
                let xij = window[i] * window[j];
                for k in j..p {
                    out.push(xij * window[k]);
                }
            }
        }
    }
}

pub fn expand_poly(matrix: &DesignMatrix, degree: usize, cap: usize) -> Result<DesignMatrix> {
    if !(2..=3).contains(&degree) {
        return Err(Error::Param(format!("polynomial degree must be 2 or 3, got {degree}")));
    }
    if matrix.feature_map != FeatureMap::RAW {
        return Err(Error::Incompatible(
            "polynomial expansion applies to raw lag features only".into(),
        ));
    }
    let ncols = poly_feature_count(matrix.ncols, degree);
    if ncols > cap {
        return Err(Error::FeatureCap {
            required: ncols,
            cap,
        });
    }
    let mut features = Vec::with_capacity(matrix.rows() * ncols);
    for row in matrix.row_iter() {
        push_poly_features(row, degree, &mut features);
    }
    Ok(DesignMatrix {
        features,
        ncols,
        targets: matrix.targets.clone(),
        provenance: matrix.provenance.clone(),
        order: matrix.order,
        feature_map: FeatureMap { degree, extras: 0 },
    })
}

pub fn append_constant_columns(
    matrix: &DesignMatrix,
    per_series: &HashMap<String, Vec<f64>>,
) -> Result<DesignMatrix> {
    let width = per_series.values().next().map_or(0, Vec::len);
    if per_series.values().any(|v| v.len() != width) {
        return Err(Error::Param("per-series extras differ in length".into()));
    }
    let ncols = matrix.ncols + width;
    let mut features = Vec::with_capacity(matrix.rows() * ncols);
    for (row, prov) in matrix.row_iter().zip(&matrix.provenance) {
        let extras = per_series.get(&*prov.series).ok_or_else(|| Error::Structure {
            series: prov.series.to_string(),
            msg: "no extra columns supplied".into(),
        })?;
        features.extend_from_slice(row);
        features.extend_from_slice(extras);
    }
    Ok(DesignMatrix {
        features,
        ncols,
        targets: matrix.targets.clone(),
        provenance: matrix.provenance.clone(),
        order: matrix.order,
        feature_map: FeatureMap {
            degree: matrix.feature_map.degree,
            extras: matrix.feature_map.extras + width,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(id: &str, v: &[f64]) -> TimeSeries {
        TimeSeries::new(id, v.to_vec())
    }

    #[test]
    fn embed_order_two() {
        let m = embed_series(&ts("a", &[1., 2., 3., 4., 5.]), 2).unwrap();
        assert_eq!(m.rows(), 3);
        assert_eq!(m.row(0), &[1., 2.]);
        assert_eq!(m.row(2), &[3., 4.]);
        assert_eq!(m.targets(), &[3., 4., 5.]);
        assert_eq!(m.provenance()[0].t, 2);
    }

    #[test]
    fn embed_minimal_and_boundary() {
        let m = embed_series(&ts("a", &[1., 2.]), 1).unwrap();
        assert_eq!((m.rows(), m.row(0), m.targets()), (1, &[1.][..], &[2.][..]));
        assert!(matches!(
            embed_series(&ts("a", &[1., 2., 3.]), 3),
            Err(Error::EmptyEmbedding { series, .. }) if series == "a"
        ));
    }

    #[test]
    fn pool_concatenates_and_checks_shape() {
        let a = embed_series(&ts("a", &[1., 2., 3., 4.]), 1).unwrap();
        let b = embed_series(&ts("b", &[9., 8.]), 1).unwrap();
        let p = pool(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(p.rows(), 4);
        assert_eq!(&*p.provenance()[3].series, "b");
        assert_eq!(pool(std::slice::from_ref(&a)).unwrap(), a);
        let c = embed_series(&ts("c", &[1., 2., 3.]), 2).unwrap();
        assert!(matches!(pool(&[a, c]), Err(Error::Incompatible(_))));
    }

    #[test]
    fn poly_counts_and_values() {
        assert_eq!(poly_feature_count(2, 2), 5);
        assert_eq!(poly_feature_count(40, 3), 12340);
        assert_eq!(poly_feature_count(3, 1), 3);
        let m = embed_series(&ts("a", &[2., 3., 7.]), 2).unwrap();
        let e = expand_poly(&m, 2, DEFAULT_FEATURE_CAP).unwrap();
        assert_eq!(e.row(0), &[2., 3., 4., 6., 9.]);
        let e3 = expand_poly(&m, 3, DEFAULT_FEATURE_CAP).unwrap();
        assert_eq!(e3.ncols(), 9);
        assert_eq!(&e3.row(0)[5..], &[8., 12., 18., 27.]);
    }

    #[test]
    fn poly_cap_refusal() {
        let s = ts("a", &(0..60).map(f64::from).collect::<Vec<_>>());
        let m = embed_series(&s, 40).unwrap();
        match expand_poly(&m, 3, 1000) {
            Err(Error::FeatureCap { required, cap }) => assert_eq!((required, cap), (12340, 1000)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_columns_follow_series() {
        let a = embed_series(&ts("a", &[1., 2., 3.]), 1).unwrap();
        let b = embed_series(&ts("b", &[4., 5.]), 1).unwrap();
        let p = pool(&[a, b]).unwrap();
        let extras: HashMap<String, Vec<f64>> =
            [("a".to_string(), vec![0.0]), ("b".to_string(), vec![0.405])].into();
        let e = append_constant_columns(&p, &extras).unwrap();
        assert_eq!(e.ncols(), 2);
        assert_eq!(e.row(0), &[1., 0.0]);
        assert_eq!(e.row(2), &[4., 0.405]);
        assert_eq!(e.feature_map().extras, 1);
        let missing: HashMap<String, Vec<f64>> = [("a".to_string(), vec![0.0])].into();
        assert!(append_constant_columns(&p, &missing).is_err());
    }
}
