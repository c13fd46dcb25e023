//! Total-variation arithmetic for step functions.
//!
//! Besides the plain total variation this module holds the two finite
//! descriptions of the unit TV ball that everything else builds on:
//!
//! * the value form: `|v_1| + sum_t |v_t - v_{t+1}| + |v_m| <= 1`, and
//! * the interval form: `v_i = sum_{a <= i <= b} w_ab` with `2 sum |w_ab| <= 1`,
//!
//! together with the conversions between them and the exact supremum of a
//! linear functional over the ball, `(max_i G_i - min_i G_i) / 2` on the
//! prefix sums `G` of the coefficients.

use std::collections::BTreeMap;

use crate::error::{GamError, Result};
use crate::step::{Extension, StepFunction};

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Penalty `|v_1| + sum_t |v_t - v_{t+1}| + |v_n|` of a value sequence; this is
/// the total variation of the compactly supported step function through it.
pub fn fused_penalty(values: &[f64]) -> f64 {
    match (values.first(), values.last()) {
        (Some(first), Some(last)) => first.abs() + interior_variation(values) + last.abs(),
        _ => 0.0,
    }
}

fn interior_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[0] - w[1]).abs()).sum()
}

/// Total variation under the function's own extension mode. Clamp mode leaves
/// out the jumps from and back to zero.
pub fn total_variation(f: &StepFunction) -> f64 {
    match f.extension() {
        Extension::Compact => fused_penalty(f.values()),
        Extension::Clamp => interior_variation(f.values()),
    }
}

/// Total variation of the compactly supported version of `f`.
pub fn compact_total_variation(f: &StepFunction) -> f64 {
    fused_penalty(f.values())
}

/// Coefficients in sorted order with their prefix sums `G_0 = 0, G_i = sum_{k<=i} g_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSums {
    gammas: Vec<f64>,
    prefix: Vec<f64>,
}

impl PartialSums {
    pub fn new(gammas: Vec<f64>) -> Self {
        let mut prefix = Vec::with_capacity(gammas.len() + 1);
        prefix.push(0.0);
        let mut acc = CompensatedSum::new();
        for &g in &gammas {
            acc.add(g);
            prefix.push(acc.value());
        }
        Self { gammas, prefix }
    }

    /// Coefficients listed along `order`, with each tie group summed into one.
    pub fn from_order(values: &[f64], order: &crate::data::FeatureOrder) -> Self {
        let merged = (0..order.n_groups())
            .map(|g| {
                let mut acc = CompensatedSum::new();
                for &i in order.group_members(g) {
                    acc.add(values[i as usize]);
                }
                acc.value()
            })
            .collect();
        Self::new(merged)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    /// `G_ab = sum_{a <= k <= b} g_k` (0-based, inclusive).
    pub fn interval(&self, a: usize, b: usize) -> f64 {
        self.prefix[b + 1] - self.prefix[a]
    }

    /// `(max_i G_i - min_i G_i) / 2` over `i = 0..=m`.
    pub fn half_range(&self) -> f64 {
        let (lo, hi) = self
            .prefix
            .iter()
            .fold((0.0f64, 0.0f64), |(lo, hi), &g| (lo.min(g), hi.max(g)));
        0.5 * (hi - lo)
    }
}

/// Exact `sup { sum_i g_i f(x_i) : TV(f) <= 1 }` over compactly supported `f`.
///
/// `x` must be sorted ascending; coefficients at equal positions are merged.
pub fn sup_gam1(gammas: &[f64], x: &[f64]) -> Result<f64> {
    if gammas.len() != x.len() {
        return Err(GamError::DimensionMismatch {
            what: "coefficients",
            expected: x.len(),
            got: gammas.len(),
        });
    }
    check_sorted(x)?;
    let mut merged: Vec<f64> = Vec::with_capacity(x.len());
    let mut acc = CompensatedSum::new();
    for (t, (&g, &xt)) in gammas.iter().zip(x).enumerate() {
        if t > 0 && xt != x[t - 1] {
            merged.push(acc.value());
            acc = CompensatedSum::new();
        }
        acc.add(g);
    }
    if !x.is_empty() {
        merged.push(acc.value());
    }
    Ok(PartialSums::new(merged).half_range())
}

fn check_sorted(x: &[f64]) -> Result<()> {
    match x.windows(2).position(|w| !(w[0] <= w[1])) {
        Some(t) => Err(GamError::Unsorted { index: t + 1 }),
        None => Ok(()),
    }
}

/// Sparse weights `w_ab` on index pairs `a <= b` (0-based).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleWeights {
    entries: BTreeMap<(usize, usize), f64>,
}

impl TriangleWeights {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `w_ab`; zero removes the entry.
    pub fn insert(&mut self, a: usize, b: usize, w: f64) -> Result<()> {
        if a > b {
            return Err(GamError::InvalidParameter(format!(
                "triangle weight index ({a}, {b}) has start after end"
            )));
        }
        if w == 0.0 {
            self.entries.remove(&(a, b));
        } else {
            self.entries.insert((a, b), w);
        }
        Ok(())
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries.get(&(a, b)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &w)| (k, w))
    }

    pub fn abs_sum(&self) -> f64 {
        self.entries.values().map(|w| w.abs()).sum()
    }

    /// Largest index used, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().map(|&(_, b)| b).max()
    }

    /// `v_i = sum_{a <= i <= b} w_ab` for `i < m`.
    pub fn coverage(&self, m: usize) -> Vec<f64> {
        let mut diff = vec![0.0; m + 1];
        for (&(a, b), &w) in &self.entries {
            if a < m {
                diff[a] += w;
                diff[(b + 1).min(m)] -= w;
            }
        }
        let mut v = Vec::with_capacity(m);
        let mut acc = CompensatedSum::new();
        for d in &diff[..m] {
            acc.add(*d);
            v.push(acc.value());
        }
        v
    }

    /// `sum_{a <= b} G_ab w_ab` for coefficients `gammas`.
    pub fn interval_inner_product(&self, gammas: &[f64]) -> f64 {
        let sums = PartialSums::new(gammas.to_vec());
        let mut acc = CompensatedSum::new();
        for (&(a, b), &w) in &self.entries {
            acc.add(sums.interval(a, b) * w);
        }
        acc.value()
    }
}

enum Removal {
    /// All remaining values were negative; the rest of the construction runs
    /// on the negated sequence.
    Flip,
    /// `star` was removed. `extend` names the interval end (`Left`: intervals
    /// ending at `prev` get extended to end at `star`) or start (`Right`:
    /// intervals starting at `next` get extended to start at `star`).
    Remove { star: usize, extend: Extend, bump: f64 },
}

enum Extend {
    Left(Option<usize>),
    Right(Option<usize>),
}

/// Interval weights reproducing `v` with `2 sum |w| = |v_1| + sum |dv| + |v_m|`.
///
/// Peels off the smallest-index maximum one element at a time. When the
/// remaining values are all negative the peeling runs on the negated sequence,
/// since a strict maximum below zero is not a local peak against the zero
/// boundary.
pub fn v_to_w(v: &[f64]) -> TriangleWeights {
    let mut w = TriangleWeights::new();
    if v.is_empty() {
        return w;
    }
    let mut labels: Vec<usize> = (0..v.len()).collect();
    let mut sign = 1.0;
    let mut steps = Vec::with_capacity(v.len());

    while labels.len() > 1 {
        let (pos, peak) = labels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bp, bv), (pos, &l)| {
                let val = sign * v[l];
                if val > bv {
                    (pos, val)
                } else {
                    (bp, bv)
                }
            });
        if peak < 0.0 {
            sign = -sign;
            steps.push(Removal::Flip);
            continue;
        }
        let prev = (pos > 0).then(|| labels[pos - 1]);
        let next = labels.get(pos + 1).copied();
        let v_prev = prev.map_or(0.0, |l| sign * v[l]);
        let v_next = next.map_or(0.0, |l| sign * v[l]);
        let star = labels.remove(pos);
        let step = if v_next < v_prev {
            Removal::Remove {
                star,
                extend: Extend::Left(prev),
                bump: peak - v_prev,
            }
        } else {
            Removal::Remove {
                star,
                extend: Extend::Right(next),
                bump: peak - v_next,
            }
        };
        steps.push(step);
    }

    let last = labels[0];
    w.entries.insert((last, last), sign * v[last]);
    w.entries.retain(|_, x| *x != 0.0);

    for step in steps.into_iter().rev() {
        match step {
            Removal::Flip => {
                for x in w.entries.values_mut() {
                    *x = -*x;
                }
            }
            Removal::Remove { star, extend, bump } => {
                match extend {
                    Extend::Left(Some(prev)) => {
                        let moved: Vec<_> = w
                            .entries
                            .iter()
                            .filter(|(&(_, b), _)| b == prev)
                            .map(|(&k, &x)| (k, x))
                            .collect();
                        for ((a, b), x) in moved {
                            w.entries.remove(&(a, b));
                            w.entries.insert((a, star), x);
                        }
                    }
                    Extend::Right(Some(next)) => {
                        let moved: Vec<_> = w
                            .entries
                            .iter()
                            .filter(|(&(a, _), _)| a == next)
                            .map(|(&k, &x)| (k, x))
                            .collect();
                        for ((a, b), x) in moved {
                            w.entries.remove(&(a, b));
                            w.entries.insert((star, b), x);
                        }
                    }
                    Extend::Left(None) | Extend::Right(None) => {}
                }
                if bump != 0.0 {
                    w.entries.insert((star, star), bump);
                }
            }
        }
    }
    w
}

/// Step function `sum 2 w_ab phi_ab` on sorted positions `x`, built as the
/// minimum-TV interpolant of its values at `x`.
pub fn w_to_step(w: &TriangleWeights, x: &[f64]) -> Result<StepFunction> {
    if let Some(b) = w.max_index() {
        if b >= x.len() {
            return Err(GamError::DimensionMismatch {
                what: "triangle weight index range",
                expected: x.len(),
                got: b + 1,
            });
        }
    }
    if w.is_empty() {
        return Ok(StepFunction::zero(Extension::Compact));
    }
    min_tv_interpolant(x, &w.coverage(x.len()))
}

/// Compactly supported step function with knots at the distinct `x` taking
/// value `v_t` at `x_t`; no function through these points has smaller TV.
pub fn min_tv_interpolant(x: &[f64], v: &[f64]) -> Result<StepFunction> {
    if x.len() != v.len() {
        return Err(GamError::DimensionMismatch {
            what: "interpolation values",
            expected: x.len(),
            got: v.len(),
        });
    }
    check_sorted(x)?;
    let mut knots = Vec::with_capacity(x.len());
    let mut values = Vec::with_capacity(x.len());
    for t in 0..x.len() {
        if t > 0 && x[t] == x[t - 1] {
            if v[t] != v[t - 1] {
                return Err(GamError::TieConflict {
                    first: t - 1,
                    second: t,
                });
            }
            continue;
        }
        knots.push(x[t]);
        values.push(v[t]);
    }
    StepFunction::new(knots, values, Extension::Compact)
}
