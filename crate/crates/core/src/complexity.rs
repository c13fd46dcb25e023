//! Monte-Carlo estimates of the empirical Rademacher and Gaussian complexity
//! of `GAM_p(C)`, and the closed-form bounds they are compared against.
//!
//! For one noise vector `s`, the supremum of `sum_i s_i f(x_i)` over `GAM_p(C)`
//! puts the whole budget on a single feature, so it equals `C` times the
//! largest per-feature half range of the prefix sums of `s` taken in sorted
//! order. The class is symmetric, so the same number is the supremum of the
//! absolute value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureOrder};
use crate::error::{GamError, Result};
use crate::rng;
use crate::tv::{CompensatedSum, PartialSums};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Rademacher,
    Gaussian,
}

impl std::str::FromStr for NoiseKind {
    type Err = GamError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rademacher" => Ok(Self::Rademacher),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(GamError::InvalidParameter(format!(
                "unknown complexity kind '{other}' (expected rademacher or gaussian)"
            ))),
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Rademacher => "rademacher",
            Self::Gaussian => "gaussian",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub kind: NoiseKind,
    pub estimate: f64,
    pub std_error: f64,
    pub draws: usize,
    pub seed: u64,
    pub budget: f64,
    pub m: usize,
    pub p: usize,
    /// Closed-form bound with `rho = 1`; absent when `p < 2`.
    pub bound: Option<f64>,
    /// `bound - estimate`, kept even when negative.
    pub slack: Option<f64>,
    /// How often each feature attained the maximum (lowest index on ties).
    pub argmax_histogram: Vec<u64>,
}

impl ComplexityReport {
    /// False when the estimate exceeds the bound by more than three standard errors.
    pub fn within_bound(&self) -> bool {
        self.slack.is_none_or(|s| s >= -3.0 * self.std_error)
    }
}

/// Inputs of the closed-form complexity bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub p: usize,
    pub m: usize,
    pub budget: f64,
    pub rho: f64,
}

/// `rho C sqrt(k ceil(ln p) / m)` with `k = 5` (`k = 6` when `p = 2`), times
/// `sqrt(2/pi)` for the Gaussian complexity.
pub fn theorem_bound(inputs: BoundInputs, kind: NoiseKind) -> Result<f64> {
    let BoundInputs { p, m, budget, rho } = inputs;
    if p < 2 {
        return Err(GamError::FeatureCountTooSmall { p, min: 2 });
    }
    if m == 0 {
        return Err(GamError::InvalidParameter("m must be at least 1".into()));
    }
    check_positive("C", budget)?;
    check_positive("rho", rho)?;
    let k = if p == 2 { 6.0 } else { 5.0 };
    let base = rho * budget * (k * ceil_ln(p) / m as f64).sqrt();
    Ok(match kind {
        NoiseKind::Rademacher => base,
        NoiseKind::Gaussian => (2.0 / std::f64::consts::PI).sqrt() * base,
    })
}

pub(crate) fn ceil_ln(p: usize) -> f64 {
    (p as f64).ln().ceil()
}

pub(crate) fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(GamError::InvalidParameter(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

/// Noise vector of draw `draw` for `m` samples.
pub fn noise_vector(kind: NoiseKind, seed: u64, draw: u64, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    let mut r = rng::stream(seed, draw);
    match kind {
        NoiseKind::Rademacher => rng::fill_signs(&mut r, |i, v| out[i] = v, m),
        NoiseKind::Gaussian => rng::fill_normals(&mut r, |i, v| out[i] = v, m),
    }
    out
}

/// Supremum of `sum_i s_i f(x_i)` over `GAM_p(1)` and the feature attaining it.
pub fn supremum(data: &Dataset, noise: &[f64]) -> Result<(f64, usize)> {
    if noise.len() != data.m() {
        return Err(GamError::DimensionMismatch {
            what: "noise vector",
            expected: data.m(),
            got: noise.len(),
        });
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (j, order) in data.orders().iter().enumerate() {
        let s = PartialSums::from_order(noise, order).half_range();
        if s > best.0 {
            best = (s, j);
        }
    }
    Ok(best)
}

const LANES: usize = 8;

/// Per-lane supremum (unit budget, not yet divided by `m`) and argmax feature.
/// `noise[i * LANES + l]` is sample `i` of lane `l`.
fn batch_suprema<const COMPENSATED: bool>(
    orders: &[FeatureOrder],
    noise: &[f64],
) -> ([f64; LANES], [u32; LANES]) {
    let mut best = [f64::NEG_INFINITY; LANES];
    let mut arg = [0u32; LANES];
    for (j, order) in orders.iter().enumerate() {
        let mut acc = [0.0f64; LANES];
        let mut comp = [0.0f64; LANES];
        let mut hi = [0.0f64; LANES];
        let mut lo = [0.0f64; LANES];
        let push = |i: u32, acc: &mut [f64; LANES], comp: &mut [f64; LANES]| {
            let row = &noise[i as usize * LANES..(i as usize + 1) * LANES];
            for l in 0..LANES {
                if COMPENSATED {
                    // Error-free transformation of acc + row.
                    let t = acc[l] + row[l];
                    let b = t - acc[l];
                    comp[l] += (acc[l] - (t - b)) + (row[l] - b);
                    acc[l] = t;
                } else {
                    acc[l] += row[l];
                }
            }
        };
        let record = |acc: &[f64; LANES], comp: &[f64; LANES], hi: &mut [f64; LANES], lo: &mut [f64; LANES]| {
            for l in 0..LANES {
                let v = if COMPENSATED { acc[l] + comp[l] } else { acc[l] };
                hi[l] = if v > hi[l] { v } else { hi[l] };
                lo[l] = if v < lo[l] { v } else { lo[l] };
            }
        };
        if order.has_ties() {
            for g in 0..order.n_groups() {
                for &i in order.group_members(g) {
                    push(i, &mut acc, &mut comp);
                }
                record(&acc, &comp, &mut hi, &mut lo);
            }
        } else {
            for &i in order.perm_raw() {
                push(i, &mut acc, &mut comp);
                record(&acc, &comp, &mut hi, &mut lo);
            }
        }
        for l in 0..LANES {
            let range = hi[l] - lo[l];
            if range > best[l] {
                best[l] = range;
                arg[l] = j as u32;
            }
        }
    }
    (best.map(|r| 0.5 * r), arg)
}

/// Unit-budget suprema (already divided by `m`) and argmax features of draws
/// `0..draws`, in draw order.
pub(crate) fn draw_suprema(
    orders: &[FeatureOrder],
    m: usize,
    kind: NoiseKind,
    draws: usize,
    seed: u64,
) -> Vec<(f64, u32)> {
    let batches = draws.div_ceil(LANES);
    let per_batch: Vec<Vec<(f64, u32)>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let lanes = LANES.min(draws - b * LANES);
            let noise = batch_noise(kind, seed, b, lanes, m);
            let (sup, arg) = match kind {
                NoiseKind::Rademacher => batch_suprema::<false>(orders, &noise),
                NoiseKind::Gaussian => batch_suprema::<true>(orders, &noise),
            };
            (0..lanes).map(|l| (sup[l] / m as f64, arg[l])).collect()
        })
        .collect();
    per_batch.into_iter().flatten().collect()
}

fn batch_noise(kind: NoiseKind, seed: u64, batch: usize, lanes: usize, m: usize) -> Vec<f64> {
    let mut noise = vec![0.0; m * LANES];
    for l in 0..lanes {
        let mut r = rng::stream(seed, (batch * LANES + l) as u64);
        let write = |i: usize, v: f64| noise[i * LANES + l] = v;
        match kind {
            NoiseKind::Rademacher => rng::fill_signs(&mut r, write, m),
            NoiseKind::Gaussian => rng::fill_normals(&mut r, write, m),
        }
    }
    noise
}

/// Sample mean and standard error of the mean, summed in index order.
pub(crate) fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut n = 0usize;
    let mut sum = CompensatedSum::new();
    for v in values.clone() {
        sum.add(v);
        n += 1;
    }
    let mean = sum.value() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let mut ss = CompensatedSum::new();
    for v in values {
        ss.add((v - mean) * (v - mean));
    }
    let var = ss.value() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Monte-Carlo estimate of the empirical complexity of `GAM_p(C)` on `data`.
pub fn estimate_complexity(
    data: &Dataset,
    budget: f64,
    kind: NoiseKind,
    draws: usize,
    seed: u64,
) -> Result<ComplexityReport> {
    check_positive("C", budget)?;
    if draws == 0 {
        return Err(GamError::InvalidParameter("draws must be at least 1".into()));
    }
    let sups = draw_suprema(data.orders(), data.m(), kind, draws, seed);
    let (mean, se) = mean_and_se(sups.iter().map(|s| s.0));
    let mut histogram = vec![0u64; data.p()];
    for &(_, j) in &sups {
        histogram[j as usize] += 1;
    }
    let estimate = budget * mean;
    let bound = theorem_bound(
        BoundInputs {
            p: data.p(),
            m: data.m(),
            budget,
            rho: 1.0,
        },
        kind,
    )
    .ok();
    Ok(ComplexityReport {
        kind,
        estimate,
        std_error: budget * se,
        draws,
        seed,
        budget,
        m: data.m(),
        p: data.p(),
        bound,
        slack: bound.map(|b| b - estimate),
        argmax_histogram: histogram,
    })
}

/// Entry distribution of synthetic feature matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureDistribution {
    /// Uniform on `[0, 1)`.
    Uniform,
    Normal,
    /// Uniform on `{-1, +1}`.
    Rademacher,
}

impl std::str::FromStr for FeatureDistribution {
    type Err = GamError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "normal" => Ok(Self::Normal),
            "rademacher" => Ok(Self::Rademacher),
            other => Err(GamError::InvalidParameter(format!(
                "unknown distribution '{other}' (expected uniform, normal or rademacher)"
            ))),
        }
    }
}

impl std::fmt::Display for FeatureDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Normal => "normal",
            Self::Rademacher => "rademacher",
        })
    }
}

/// `m x p` i.i.d. features with zero targets. `stream` selects an
/// independent matrix for the same seed.
pub fn synthetic_features(
    distribution: FeatureDistribution,
    p: usize,
    m: usize,
    seed: u64,
    stream: u64,
) -> Result<Dataset> {
    use rand::Rng;
    let mut r = rng::stream(seed, rng::DATA_STREAM + stream);
    let mut features = vec![0.0; m * p];
    match distribution {
        FeatureDistribution::Uniform => features.iter_mut().for_each(|x| *x = r.random::<f64>()),
        FeatureDistribution::Normal => rng::fill_normals(&mut r, |i, v| features[i] = v, m * p),
        FeatureDistribution::Rademacher => rng::fill_signs(&mut r, |i, v| features[i] = v, m * p),
    }
    Dataset::from_flat(m, p, features, vec![0.0; m])
}

/// Comparison of the sign classes `J_p` with `GAM_p(2)` on `{-1, +1}^p` data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub p: usize,
    pub m: usize,
    pub draws: usize,
    pub seed: u64,
    pub budget: f64,
    pub sign_class: f64,
    pub sign_class_std_error: f64,
    pub gam: f64,
    pub gam_std_error: f64,
    pub combined_std_error: f64,
    /// `sign_class <= gam + 3 * combined_std_error`.
    pub ordering_holds: bool,
}

/// Estimates the Rademacher complexity of `{x -> +-sign(x_j)}` and of
/// `GAM_p(2)` on one sample of `m` uniform points of `{-1, +1}^p`.
/// Both estimates use the same noise draws.
pub fn tightness_experiment(p: usize, m: usize, draws: usize, seed: u64) -> Result<TightnessReport> {
    if p < 2 {
        return Err(GamError::FeatureCountTooSmall { p, min: 2 });
    }
    if m == 0 || draws == 0 {
        return Err(GamError::InvalidParameter("m and draws must be at least 1".into()));
    }
    let budget = 2.0;
    let data = synthetic_features(FeatureDistribution::Rademacher, p, m, seed, 0)?;
    let gam = estimate_complexity(&data, budget, NoiseKind::Rademacher, draws, seed)?;

    let columns: Vec<Vec<f64>> = (0..p).map(|j| data.column(j)).collect();
    let batches = draws.div_ceil(LANES);
    let sign_values: Vec<f64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let lanes = LANES.min(draws - b * LANES);
            let noise = batch_noise(NoiseKind::Rademacher, seed, b, lanes, m);
            let mut best = [0.0f64; LANES];
            for col in &columns {
                let mut acc = [0.0f64; LANES];
                for (i, &x) in col.iter().enumerate() {
                    let row = &noise[i * LANES..(i + 1) * LANES];
                    for l in 0..LANES {
                        acc[l] += x * row[l];
                    }
                }
                for l in 0..LANES {
                    best[l] = best[l].max(acc[l].abs());
                }
            }
            best[..lanes].iter().map(|b| b / m as f64).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let (sign_class, sign_se) = mean_and_se(sign_values.iter().copied());
    let combined = (sign_se * sign_se + gam.std_error * gam.std_error).sqrt();
    Ok(TightnessReport {
        p,
        m,
        draws,
        seed,
        budget,
        sign_class,
        sign_class_std_error: sign_se,
        gam: gam.estimate,
        gam_std_error: gam.std_error,
        combined_std_error: combined,
        ordering_holds: sign_class <= gam.estimate + 3.0 * combined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub p: usize,
    pub m: usize,
    pub estimate: f64,
    pub std_error: f64,
    /// Rademacher bound with `rho = 1`; absent for `p < 2`.
    pub bound: Option<f64>,
    /// `estimate / bound`.
    pub ratio: Option<f64>,
}

/// Rademacher complexity estimates over a grid of feature counts and sample
/// sizes, on i.i.d. synthetic features. Rows are ordered by `p`, then `m`.
pub fn scaling_experiment(
    p_grid: &[usize],
    m_grid: &[usize],
    budget: f64,
    draws: usize,
    seed: u64,
    distribution: FeatureDistribution,
) -> Result<Vec<ScalingRow>> {
    if p_grid.is_empty() || m_grid.is_empty() {
        return Err(GamError::InvalidParameter("grids must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(p_grid.len() * m_grid.len());
    for (a, &p) in p_grid.iter().enumerate() {
        for (b, &m) in m_grid.iter().enumerate() {
            if p == 0 || m == 0 {
                return Err(GamError::InvalidParameter("grid entries must be positive".into()));
            }
            let cell = (a * m_grid.len() + b) as u64;
            let data = synthetic_features(distribution, p, m, seed, cell)?;
            let r = estimate_complexity(&data, budget, NoiseKind::Rademacher, draws, seed)?;
            rows.push(ScalingRow {
                p,
                m,
                estimate: r.estimate,
                std_error: r.std_error,
                bound: r.bound,
                ratio: r.bound.map(|b| r.estimate / b),
            });
        }
    }
    Ok(rows)
}
