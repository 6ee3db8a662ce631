//! Disjoint groupings of a series set, with one global model per group.
//!
//! The trivial partition (one group) is the plain global model; the atomic
//! partition (one series per group) is the local approach.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{TimeSeries, TimeSeriesSet};
use crate::embed::{embed_series, pool};
use crate::error::{Error, Result};
use crate::models::{fit_global, FittedModel, ModelSpec};
use crate::preprocess::Prepared;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scheme {
    Random { seed: u64 },
    ByKey(String),
    Atomic,
    Trivial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    assignment: BTreeMap<String, usize>,
    groups: usize,
    pub scheme: Scheme,
}

impl Partition {
    pub fn trivial(set: &TimeSeriesSet) -> Self {
        Self {
            assignment: set.iter().map(|s| (s.id.clone(), 0)).collect(),
            groups: 1,
            scheme: Scheme::Trivial,
        }
    }

    pub fn atomic(set: &TimeSeriesSet) -> Self {
        Self {
            assignment: set.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect(),
            groups: set.len(),
            scheme: Scheme::Atomic,
        }
    }

    /// Number of groups, P.
    pub fn len(&self) -> usize {
        self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.groups == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.groups == 1
    }

    pub fn is_atomic(&self) -> bool {
        self.groups == self.assignment.len()
    }

    pub fn group_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    /// Member indices of each group, in set order.
    pub fn members(&self, set: &TimeSeriesSet) -> Result<Vec<Vec<usize>>> {
        let mut out = vec![Vec::new(); self.groups];
        for (i, s) in set.iter().enumerate() {
            let g = self.group_of(&s.id).ok_or_else(|| {
                Error::Partition(format!("series '{}' is not assigned to a group", s.id))
            })?;
            out[g].push(i);
        }
        Ok(out)
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.groups];
        for &g in self.assignment.values() {
            sizes[g] += 1;
        }
        sizes
    }
}

/// Seeded shuffle of the sorted ids followed by round-robin assignment.
pub fn random_partition(set: &TimeSeriesSet, groups: usize, seed: u64) -> Result<Partition> {
    if groups == 0 || groups > set.len() {
        return Err(Error::Partition(format!(
            "cannot split {} series into {} groups",
            set.len(),
            groups
        )));
    }
    let mut ids: Vec<&str> = set.iter().map(|s| s.id.as_str()).collect();
    ids.sort_unstable();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(Partition {
        assignment: ids
            .into_iter()
            .enumerate()
            .map(|(i, id)| (id.to_string(), i % groups))
            .collect(),
        groups,
        scheme: Scheme::Random { seed },
    })
}

/// One group per distinct value of a metadata field, ordered by value.
pub fn keyed_partition(set: &TimeSeriesSet, key: &str) -> Result<Partition> {
    let value: fn(&TimeSeries) -> usize = match key {
        "season_period" => |s| s.season_period,
        "horizon" => |s| s.horizon,
        other => {
            return Err(Error::Partition(format!(
                "series '{}' has no metadata field '{other}'",
                set.series()[0].id
            )))
        }
    };
    let keys: BTreeMap<usize, usize> = {
        let mut distinct: Vec<usize> = set.iter().map(value).collect();
        distinct.sort_unstable();
        distinct.dedup();
        distinct.into_iter().enumerate().map(|(g, k)| (k, g)).collect()
    };
    Ok(Partition {
        assignment: set.iter().map(|s| (s.id.clone(), keys[&value(s)])).collect(),
        groups: keys.len(),
        scheme: Scheme::ByKey(key.to_string()),
    })
}

/// Fits one global model per group on the pooled prepared series of that
/// group. `prepared` is aligned with `set`. Group `g` of the result is
/// element `g` of the returned vector.
pub fn fit_partitioned(
    set: &TimeSeriesSet,
    prepared: &[Prepared],
    partition: &Partition,
    spec: &ModelSpec,
    p: usize,
    feature_cap: usize,
) -> Result<Vec<FittedModel>> {
    if !spec.is_global() {
        return Err(Error::Usage(format!("'{spec}' cannot be fitted per partition")));
    }
    if prepared.len() != set.len() {
        return Err(Error::Dimension {
            expected: set.len(),
            got: prepared.len(),
        });
    }
    let members = partition.members(set)?;
    members
        .par_iter()
        .enumerate()
        .map(|(g, idx)| {
            fit_group(prepared, idx, spec, p, feature_cap)
                .map_err(|e| Error::Partition(format!("group {g}: {e}")))
        })
        .collect()
}

fn fit_group(
    prepared: &[Prepared],
    idx: &[usize],
    spec: &ModelSpec,
    p: usize,
    feature_cap: usize,
) -> Result<FittedModel> {
    if idx.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let parts = idx
        .iter()
        .map(|&i| embed_series(&prepared[i].scaled, p))
        .collect::<Result<Vec<_>>>()?;
    let raw = pool(&parts)?;
    let with_extras = prepared[idx[0]].extras.len();
    let extras: Option<HashMap<String, Vec<f64>>> = (with_extras > 0).then(|| {
        idx.iter()
            .map(|&i| (prepared[i].scaled.id.clone(), prepared[i].extras.clone()))
            .collect()
    });
    fit_global(spec, &raw, extras.as_ref(), feature_cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(k: usize) -> TimeSeriesSet {
        TimeSeriesSet::new(
            (0..k)
                .map(|i| TimeSeries::new(format!("s{i:02}"), vec![i as f64, 1.0, 2.0]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn random_partition_sizes() {
        let s = set(10);
        let p1 = random_partition(&s, 1, 7).unwrap();
        assert!(p1.is_trivial());
        assert_eq!(p1.group_sizes(), vec![10]);
        let p10 = random_partition(&s, 10, 7).unwrap();
        assert!(p10.is_atomic());
        assert!(p10.group_sizes().iter().all(|&n| n == 1));
        let mut sizes = random_partition(&s, 3, 7).unwrap().group_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
        assert!(random_partition(&s, 11, 7).is_err());
    }

    #[test]
    fn random_partition_ignores_input_order() {
        let s = set(9);
        let mut rev: Vec<TimeSeries> = s.series().to_vec();
        rev.reverse();
        let r = TimeSeriesSet::new(rev).unwrap();
        assert_eq!(
            random_partition(&s, 4, 3).unwrap(),
            random_partition(&r, 4, 3).unwrap()
        );
    }

    #[test]
    fn keyed_groups() {
        let s = TimeSeriesSet::new(vec![
            TimeSeries::new("a", vec![1., 2.]).with_meta(12, 1),
            TimeSeries::new("b", vec![1., 2.]).with_meta(12, 1),
            TimeSeries::new("c", vec![1., 2.]).with_meta(4, 1),
        ])
        .unwrap();
        let p = keyed_partition(&s, "season_period").unwrap();
        assert_eq!(p.len(), 2);
        // ordered by key: 4 first
        assert_eq!(p.group_of("c"), Some(0));
        assert_eq!(p.group_sizes(), vec![1, 2]);
        assert!(keyed_partition(&s, "horizon").unwrap().is_trivial());
        assert!(keyed_partition(&s, "colour").is_err());
    }
}
