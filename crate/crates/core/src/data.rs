//! Training samples and the per-feature sort orders used by the solver and the
//! complexity estimators.
//!
//! Every consumer in this crate looks at a feature only through its sort order
//! and its tie groups, never through the raw values. That is what makes fits
//! and complexity estimates invariant under strictly increasing per-feature
//! transformations.

use crate::error::{GamError, Result};

/// Stable ascending order of one feature column, with groups of bitwise-equal
/// values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureOrder {
    perm: Vec<u32>,
    /// Start offsets (into `perm`) of each tie group, followed by `m`.
    /// Left empty when every value is distinct.
    group_starts: Vec<u32>,
    /// Group index of every sample, in sample order.
    sample_group: Vec<u32>,
    n_groups: usize,
}

impl FeatureOrder {
    fn from_column(column: &[f64]) -> Self {
        let m = column.len();
        let mut perm: Vec<u32> = (0..m as u32).collect();
        // `sort_by` is stable, so equal keys keep sample order.
        perm.sort_by(|&a, &b| column[a as usize].total_cmp(&column[b as usize]));

        let mut starts = Vec::with_capacity(m + 1);
        let mut sample_group = vec![0u32; m];
        for (pos, &i) in perm.iter().enumerate() {
            let new_group = pos == 0
                || column[i as usize].to_bits() != column[perm[pos - 1] as usize].to_bits();
            if new_group {
                starts.push(pos as u32);
            }
            sample_group[i as usize] = (starts.len() - 1) as u32;
        }
        let n_groups = starts.len();
        if n_groups == m {
            starts.clear();
        } else {
            starts.push(m as u32);
        }
        Self {
            perm,
            group_starts: starts,
            sample_group,
            n_groups,
        }
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Sample indices sorted by feature value (0-based).
    pub fn permutation(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.perm.iter().map(|&i| i as usize)
    }

    pub(crate) fn perm_raw(&self) -> &[u32] {
        &self.perm
    }

    /// True when the column contains at least one repeated value.
    pub fn has_ties(&self) -> bool {
        !self.group_starts.is_empty()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    /// Half-open range of sorted positions occupied by tie group `g`.
    pub fn group_range(&self, g: usize) -> std::ops::Range<usize> {
        if self.group_starts.is_empty() {
            g..g + 1
        } else {
            self.group_starts[g] as usize..self.group_starts[g + 1] as usize
        }
    }

    /// Sample indices belonging to tie group `g`.
    pub fn group_members(&self, g: usize) -> &[u32] {
        &self.perm[self.group_range(g)]
    }

    /// Tie-group index of sample `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.sample_group[i] as usize
    }

    /// Number of samples in each tie group.
    pub fn group_sizes(&self) -> Vec<usize> {
        (0..self.n_groups).map(|g| self.group_range(g).len()).collect()
    }
}

/// `m` samples of `p` real features plus one target per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    m: usize,
    p: usize,
    /// Row-major `m x p`.
    features: Vec<f64>,
    targets: Vec<f64>,
    orders: Vec<FeatureOrder>,
}

impl Dataset {
    /// Builds a dataset from rows of features and their targets.
    pub fn new(rows: &[Vec<f64>], targets: &[f64]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(GamError::EmptyDataset);
        }
        let p = rows[0].len();
        let mut flat = Vec::with_capacity(m * p);
        for row in rows {
            if row.len() != p {
                return Err(GamError::DimensionMismatch {
                    what: "feature row",
                    expected: p,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(m, p, flat, targets.to_vec())
    }

    /// Builds a dataset from a row-major `m x p` buffer.
    ///
    /// Negative zero is folded into positive zero so that equal positions share
    /// one tie group.
    pub fn from_flat(m: usize, p: usize, mut features: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(GamError::EmptyDataset);
        }
        if p == 0 {
            return Err(GamError::NoFeatures);
        }
        if features.len() != m * p {
            return Err(GamError::DimensionMismatch {
                what: "feature buffer",
                expected: m * p,
                got: features.len(),
            });
        }
        if targets.len() != m {
            return Err(GamError::DimensionMismatch {
                what: "targets",
                expected: m,
                got: targets.len(),
            });
        }
        if let Some(k) = features.iter().position(|v| !v.is_finite()) {
            return Err(GamError::NonFiniteFeature {
                row: k / p,
                col: k % p,
            });
        }
        if let Some(row) = targets.iter().position(|v| !v.is_finite()) {
            return Err(GamError::NonFiniteTarget { row });
        }

        for v in features.iter_mut() {
            *v += 0.0;
        }

        let mut column = vec![0.0; m];
        let orders = (0..p)
            .map(|j| {
                for (i, c) in column.iter_mut().enumerate() {
                    *c = features[i * p + j];
                }
                FeatureOrder::from_column(&column)
            })
            .collect();

        Ok(Self {
            m,
            p,
            features,
            targets,
            orders,
        })
    }

    /// Number of samples.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of features.
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.p + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.value(i, j)).collect()
    }

    pub fn order(&self, j: usize) -> &FeatureOrder {
        &self.orders[j]
    }

    pub fn orders(&self) -> &[FeatureOrder] {
        &self.orders
    }

    /// Distinct values of feature `j`, ascending (one per tie group).
    pub fn group_values(&self, j: usize) -> Vec<f64> {
        let order = &self.orders[j];
        (0..order.n_groups())
            .map(|g| self.value(order.group_members(g)[0] as usize, j))
            .collect()
    }

    /// Same features, new targets.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Self> {
        if targets.len() != self.m {
            return Err(GamError::DimensionMismatch {
                what: "targets",
                expected: self.m,
                got: targets.len(),
            });
        }
        if let Some(row) = targets.iter().position(|v| !v.is_finite()) {
            return Err(GamError::NonFiniteTarget { row });
        }
        Ok(Self {
            targets,
            ..self.clone()
        })
    }

    /// Applies a map to every value of feature `j` and rebuilds the orders.
    pub fn map_feature(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut features = self.features.clone();
        for i in 0..self.m {
            let k = i * self.p + j;
            features[k] = f(features[k]);
        }
        Self::from_flat(self.m, self.p, features, self.targets.clone())
    }
}
