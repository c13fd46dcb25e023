//! Direct lasso over interval indicators, one coefficient per pair of tie
//! groups `s <= t` of each feature.
//!
//! Coefficient `w` on `(j, s, t)` adds `w` to every sample whose feature `j`
//! falls in groups `s..=t` and costs `2 lam |w|`. Smooth losses are solved by
//! accelerated proximal gradient with restarts, nonsmooth ones by a
//! proximal subgradient method with diminishing steps.

use crate::data::Dataset;
use crate::error::{GamError, Result};
use crate::loss::LossSpec;
use crate::model::GamModel;
use crate::tv::{min_tv_interpolant, TriangleWeights};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Largest number of basis coefficients the oracle accepts.
    pub cap: usize,
    pub max_iters: usize,
    /// Relative objective change at which iteration stops.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            cap: 20_000,
            max_iters: 1_000_000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleFit {
    pub model: GamModel,
    /// `sum_i loss + 2 lam sum |w|` at the returned coefficients.
    pub objective: f64,
    /// One set of interval weights per feature, indexed by tie group.
    pub weights: Vec<TriangleWeights>,
    pub iterations: usize,
    pub converged: bool,
}

/// Consecutive iterations over which the relative change must stay below tol.
const STALL_WINDOW: usize = 50;

struct Basis<'a> {
    data: &'a Dataset,
    /// Per feature: number of tie groups and offset of its first coefficient.
    groups: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
}

impl<'a> Basis<'a> {
    fn new(data: &'a Dataset) -> Self {
        let groups: Vec<usize> = data.orders().iter().map(|o| o.n_groups()).collect();
        let mut offsets = Vec::with_capacity(groups.len());
        let mut len = 0;
        for &g in &groups {
            offsets.push(len);
            len += g * (g + 1) / 2;
        }
        Self {
            data,
            groups,
            offsets,
            len,
        }
    }

    /// Coefficients of feature `j` in `(s, t)` lexicographic order.
    fn pairs(g: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..g).flat_map(move |s| (s..g).map(move |t| (s, t)))
    }

    fn predict(&self, w: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|a| *a = 0.0);
        for (j, &g) in self.groups.iter().enumerate() {
            let mut diff = vec![0.0; g + 1];
            for (k, (s, t)) in Self::pairs(g).enumerate() {
                let x = w[self.offsets[j] + k];
                if x != 0.0 {
                    diff[s] += x;
                    diff[t + 1] -= x;
                }
            }
            let mut level = vec![0.0; g];
            let mut acc = 0.0;
            for (l, d) in level.iter_mut().zip(&diff) {
                acc += d;
                *l = acc;
            }
            let order = self.data.order(j);
            for (i, a) in out.iter_mut().enumerate() {
                *a += level[order.group_of(i)];
            }
        }
    }

    /// Transpose product: per-sample values `r` mapped to coefficient space.
    fn adjoint(&self, r: &[f64], out: &mut [f64]) {
        for (j, &g) in self.groups.iter().enumerate() {
            let order = self.data.order(j);
            let mut sums = vec![0.0; g];
            for (i, &x) in r.iter().enumerate() {
                sums[order.group_of(i)] += x;
            }
            let mut prefix = vec![0.0; g + 1];
            for t in 0..g {
                prefix[t + 1] = prefix[t] + sums[t];
            }
            for (k, (s, t)) in Self::pairs(g).enumerate() {
                out[self.offsets[j] + k] = prefix[t + 1] - prefix[s];
            }
        }
    }

    /// Largest eigenvalue of `A^T A` by power iteration.
    fn spectral_norm_sq(&self) -> f64 {
        let mut x = vec![1.0; self.len];
        let mut ax = vec![0.0; self.data.m()];
        let mut est = 0.0;
        for _ in 0..100 {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= norm);
            self.predict(&x, &mut ax);
            est = ax.iter().map(|v| v * v).sum::<f64>();
            self.adjoint(&ax, &mut x);
        }
        est
    }

    fn split(&self, w: &[f64]) -> Vec<TriangleWeights> {
        self.groups
            .iter()
            .enumerate()
            .map(|(j, &g)| {
                let mut tw = TriangleWeights::new();
                for (k, (s, t)) in Self::pairs(g).enumerate() {
                    tw.insert(s, t, w[self.offsets[j] + k])
                        .expect("pairs are ordered");
                }
                tw
            })
            .collect()
    }
}

fn soft_threshold(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

struct Problem<'a> {
    basis: Basis<'a>,
    loss: &'a LossSpec,
    lambda: f64,
}

impl Problem<'_> {
    fn risk(&self, predictions: &[f64]) -> f64 {
        predictions
            .iter()
            .zip(self.basis.data.targets())
            .map(|(&a, &y)| self.loss.value_unchecked(a, y))
            .sum()
    }

    fn penalty(&self, w: &[f64]) -> f64 {
        2.0 * self.lambda * w.iter().map(|x| x.abs()).sum::<f64>()
    }

    fn objective(&self, w: &[f64], scratch: &mut [f64]) -> f64 {
        self.basis.predict(w, scratch);
        self.risk(scratch) + self.penalty(w)
    }

    /// Risk value and gradient at `w`.
    fn smooth_part(&self, w: &[f64], pred: &mut [f64], grad: &mut [f64]) -> f64 {
        self.basis.predict(w, pred);
        let risk = self.risk(pred);
        let d: Vec<f64> = pred
            .iter()
            .zip(self.basis.data.targets())
            .map(|(&a, &y)| self.loss.derivatives(a, y).0)
            .collect();
        self.basis.adjoint(&d, grad);
        risk
    }

    fn fista(&self, config: &OracleConfig) -> (Vec<f64>, f64, usize, bool) {
        let n = self.basis.len;
        let m = self.basis.data.m();
        let mut pred = vec![0.0; m];
        let mut grad = vec![0.0; n];
        let mut lip = (self.loss.curvature_bound() * self.basis.spectral_norm_sq()).max(1e-12);

        let mut x = vec![0.0; n];
        let mut y = x.clone();
        let mut t: f64 = 1.0;
        let mut obj = self.objective(&x, &mut pred);
        let mut stall = 0;
        let mut cand = vec![0.0; n];

        for it in 1..=config.max_iters {
            let fy = self.smooth_part(&y, &mut pred, &mut grad);
            loop {
                for k in 0..n {
                    cand[k] = soft_threshold(y[k] - grad[k] / lip, 2.0 * self.lambda / lip);
                }
                self.basis.predict(&cand, &mut pred);
                let f_cand = self.risk(&pred);
                let mut model = fy;
                for k in 0..n {
                    let d = cand[k] - y[k];
                    model += grad[k] * d + 0.5 * lip * d * d;
                }
                if f_cand <= model + 1e-12 * (1.0 + fy.abs()) {
                    break;
                }
                lip *= 2.0;
            }
            let new_obj = self.objective(&cand, &mut pred);
            if new_obj > obj {
                // Momentum overshoot: restart from the last accepted point. An
                // unaccelerated step cannot increase the objective beyond
                // rounding, so repeated restarts mean no progress.
                y.copy_from_slice(&x);
                t = 1.0;
                stall += 1;
                if stall >= STALL_WINDOW {
                    return (x, obj, it, true);
                }
                continue;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for k in 0..n {
                y[k] = cand[k] + beta * (cand[k] - x[k]);
            }
            x.copy_from_slice(&cand);
            t = t_next;
            let change = obj - new_obj;
            obj = new_obj;
            if change <= config.tol * obj.abs().max(f64::MIN_POSITIVE) {
                stall += 1;
                if stall >= STALL_WINDOW {
                    return (x, obj, it, true);
                }
            } else {
                stall = 0;
            }
        }
        (x, obj, config.max_iters, false)
    }

    fn subgradient(&self, config: &OracleConfig) -> (Vec<f64>, f64, usize, bool) {
        let n = self.basis.len;
        let data = self.basis.data;
        let mut pred = vec![0.0; data.m()];
        let mut grad = vec![0.0; n];
        let y_scale = data
            .targets()
            .iter()
            .fold(0.0f64, |acc, y| acc.max(y.abs()))
            .max(f64::MIN_POSITIVE);
        let degree = (self.basis.spectral_norm_sq().sqrt()).max(1.0);
        let eta0 = y_scale / degree;

        let mut w = vec![0.0; n];
        let mut best = w.clone();
        let mut best_obj = self.objective(&w, &mut pred);
        let mut last_improvement = 0;
        let patience = config.max_iters.min(200_000) / 4;
        for it in 0..config.max_iters {
            self.basis.predict(&w, &mut pred);
            let d: Vec<f64> = pred
                .iter()
                .zip(data.targets())
                .map(|(&a, &y)| self.loss.subgradient(a, y))
                .collect();
            self.basis.adjoint(&d, &mut grad);
            let eta = eta0 / ((it + 1) as f64).sqrt();
            for k in 0..n {
                w[k] = soft_threshold(w[k] - eta * grad[k], 2.0 * self.lambda * eta);
            }
            let obj = self.objective(&w, &mut pred);
            if obj < best_obj {
                if best_obj - obj > config.tol * obj.abs() {
                    last_improvement = it;
                }
                best_obj = obj;
                best.copy_from_slice(&w);
            }
            if it - last_improvement > patience.max(1000) {
                return (best, best_obj, it + 1, true);
            }
        }
        (best, best_obj, config.max_iters, false)
    }
}

/// Solves the interval-indicator lasso with default settings and returns the
/// assembled model together with its objective.
pub fn fit_oracle_l1(data: &Dataset, loss: &LossSpec, lambda: f64) -> Result<(GamModel, f64)> {
    let fit = fit_oracle_l1_with(data, loss, lambda, &OracleConfig::default())?;
    Ok((fit.model, fit.objective))
}

pub fn fit_oracle_l1_with(
    data: &Dataset,
    loss: &LossSpec,
    lambda: f64,
    config: &OracleConfig,
) -> Result<OracleFit> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(GamError::InvalidParameter(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    if !loss.is_convex() {
        return Err(GamError::UnsupportedLoss(
            "clipped losses are not convex and cannot be fitted".into(),
        ));
    }
    loss.check_targets(data.targets())?;
    let basis = Basis::new(data);
    if basis.len > config.cap {
        return Err(GamError::OracleTooLarge {
            basis: basis.len,
            p: data.p(),
            m: data.m(),
            cap: config.cap,
        });
    }
    let problem = Problem {
        basis,
        loss,
        lambda,
    };
    let (w, objective, iterations, converged) = if loss.kind.is_smooth() {
        problem.fista(config)
    } else {
        problem.subgradient(config)
    };
    let weights = problem.basis.split(&w);
    let functions = weights
        .iter()
        .enumerate()
        .map(|(j, tw)| {
            let x = data.group_values(j);
            min_tv_interpolant(&x, &tw.coverage(x.len())).map(|f| f.simplified())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleFit {
        model: GamModel::new(functions, 0.0),
        objective,
        weights,
        iterations,
        converged,
    })
}
