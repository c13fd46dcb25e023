//! Exact proximal operator of the boundary fused-lasso penalty.
//!
//! Solves
//!
//! ```text
//! minimize  1/2 sum_t w_t (v_t - z_t)^2 + lam (|v_1| + sum_t |v_t - v_{t+1}| + |v_n|)
//! ```
//!
//! by treating the boundary terms as fusion to fixed zeros `v_0 = v_{n+1} = 0`
//! and running a forward dynamic program over the derivative of the
//! min-convolution messages. Each message derivative is piecewise linear and
//! nondecreasing; it is stored as a deque of breakpoints carrying the change
//! of its affine coefficients. The backward pass clips each value into the
//! interval where the previous message derivative lies in `[-lam, lam]`.

use std::collections::VecDeque;

use crate::error::{GamError, Result};

/// One denoising subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxProblem {
    pub z: Vec<f64>,
    pub weights: Vec<f64>,
    pub lam: f64,
}

impl ProxProblem {
    pub fn new(z: Vec<f64>, weights: Vec<f64>, lam: f64) -> Result<Self> {
        if z.len() != weights.len() {
            return Err(GamError::DimensionMismatch {
                what: "prox weights",
                expected: z.len(),
                got: weights.len(),
            });
        }
        if let Some(t) = z.iter().position(|v| !v.is_finite()) {
            return Err(GamError::InvalidParameter(format!("z[{t}] is not finite")));
        }
        if let Some(t) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(GamError::InvalidParameter(format!(
                "weight {t} must be positive and finite"
            )));
        }
        if !(lam >= 0.0) {
            return Err(GamError::InvalidParameter(format!(
                "prox penalty must be nonnegative, got {lam}"
            )));
        }
        Ok(Self { z, weights, lam })
    }

    /// Uniform unit weights.
    pub fn unweighted(z: Vec<f64>, lam: f64) -> Result<Self> {
        let n = z.len();
        Self::new(z, vec![1.0; n], lam)
    }

    pub fn objective(&self, v: &[f64]) -> f64 {
        let fit: f64 = v
            .iter()
            .zip(&self.z)
            .zip(&self.weights)
            .map(|((v, z), w)| 0.5 * w * (v - z) * (v - z))
            .sum();
        if self.lam == 0.0 {
            fit
        } else {
            fit + self.lam * crate::tv::fused_penalty(v)
        }
    }

    pub fn solve(&self) -> Vec<f64> {
        prox_fused_boundary(&self.z, &self.weights, self.lam)
    }
}

/// Breakpoint: crossing `pos` from left to right adds `(da, dc)` to the
/// affine piece `a * b + c` of the derivative.
#[derive(Debug, Clone, Copy)]
struct Knot {
    pos: f64,
    da: f64,
    dc: f64,
}

/// Exact minimizer of the weighted boundary fused-lasso denoising problem.
/// Inputs are not validated; use [`ProxProblem`] for checked construction.
pub fn prox_fused_boundary(z: &[f64], weights: &[f64], lam: f64) -> Vec<f64> {
    let n = z.len();
    if n == 0 {
        return Vec::new();
    }
    if lam == 0.0 {
        return z.to_vec();
    }

    // Derivative of lam * |b - 0|, the message from the fixed left boundary.
    let mut knots: VecDeque<Knot> = VecDeque::with_capacity(2 * n + 2);
    knots.push_back(Knot {
        pos: 0.0,
        da: 0.0,
        dc: 2.0 * lam,
    });
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];

    for t in 0..n {
        let w = weights[t];
        // Affine pieces left and right of all breakpoints, after adding the
        // data term w (b - z_t).
        let (mut a, mut c) = (w, -lam - w * z[t]);
        let target_lo = -lam;
        // Scan from the left for the crossing of -lam.
        let low = loop {
            match knots.front().copied() {
                Some(k) if a * k.pos + c >= target_lo => break (target_lo - c) / a,
                Some(k) => {
                    knots.pop_front();
                    let (na, nc) = (a + k.da, c + k.dc);
                    if na * k.pos + nc >= target_lo {
                        a = na;
                        c = nc;
                        break k.pos;
                    }
                    a = na;
                    c = nc;
                }
                None => break (target_lo - c) / a,
            }
        };
        knots.push_front(Knot {
            pos: low,
            da: a,
            dc: c + lam,
        });

        let (mut a, mut c) = (w, lam - w * z[t]);
        let target_hi = lam;
        let high = loop {
            match knots.back().copied() {
                Some(k) if a * k.pos + c <= target_hi => break (target_hi - c) / a,
                Some(k) => {
                    knots.pop_back();
                    let (na, nc) = (a - k.da, c - k.dc);
                    if na * k.pos + nc <= target_hi {
                        a = na;
                        c = nc;
                        break k.pos;
                    }
                    a = na;
                    c = nc;
                }
                None => break (target_hi - c) / a,
            }
        };
        knots.push_back(Knot {
            pos: high,
            da: -a,
            dc: lam - c,
        });

        lo[t] = low;
        hi[t] = high.max(low);
    }

    let mut v = vec![0.0; n];
    v[n - 1] = 0.0f64.clamp(lo[n - 1], hi[n - 1]);
    for t in (0..n - 1).rev() {
        v[t] = v[t + 1].clamp(lo[t], hi[t]);
    }
    v
}

/// Result of the subgradient optimality test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityCheck {
    /// Smallest achievable stationarity residual (in objective-gradient units).
    pub violation: f64,
    pub tolerance: f64,
}

impl OptimalityCheck {
    pub fn passed(&self) -> bool {
        self.violation <= self.tolerance
    }
}

/// Certifies `v` as a minimizer of `problem`.
///
/// Stationarity reads `w_t (v_t - z_t) = lam (u_t - u_{t-1})` with a dual
/// `u_e` in the subdifferential of `|v_{e+1} - v_e|` for every edge
/// `e = 0..n` (both boundary edges included). Every `u_e` is `u_0` plus a
/// known partial sum, so optimality is the nonemptiness of an intersection of
/// intervals for `u_0`; the violation is `lam` times the size of the gap.
/// Differences below `fuse_tol` count as fused. The tolerance is scaled by
/// `1 + max_t w_t |z_t|`.
pub fn check_optimality(problem: &ProxProblem, v: &[f64], tol: f64) -> OptimalityCheck {
    let n = problem.z.len();
    let scale = 1.0
        + problem
            .z
            .iter()
            .zip(&problem.weights)
            .map(|(z, w)| (w * z).abs())
            .fold(0.0, f64::max);
    let tolerance = tol * scale;
    if v.len() != n {
        return OptimalityCheck {
            violation: f64::INFINITY,
            tolerance,
        };
    }
    let lam = problem.lam;
    if lam == 0.0 {
        let violation = v
            .iter()
            .zip(&problem.z)
            .zip(&problem.weights)
            .map(|((v, z), w)| (w * (v - z)).abs())
            .fold(0.0, f64::max);
        return OptimalityCheck {
            violation,
            tolerance,
        };
    }
    let fuse_tol = 1e-12 * scale;

    // u_e = u_0 + s_e with s_e = sum_{t<=e} w_t (v_t - z_t) / lam, e = 0..n
    // (0-based values v_0..v_{n-1}; edge e joins value e-1 and value e).
    let mut lo_u0 = f64::NEG_INFINITY;
    let mut hi_u0 = f64::INFINITY;
    let mut s = 0.0;
    for e in 0..=n {
        let left = if e == 0 { 0.0 } else { v[e - 1] };
        let right = if e == n { 0.0 } else { v[e] };
        let d = right - left;
        let (ilo, ihi) = if d.abs() <= fuse_tol {
            (-1.0, 1.0)
        } else if d > 0.0 {
            (1.0, 1.0)
        } else {
            (-1.0, -1.0)
        };
        lo_u0 = lo_u0.max(ilo - s);
        hi_u0 = hi_u0.min(ihi - s);
        if e < n {
            s += problem.weights[e] * (v[e] - problem.z[e]) / lam;
        }
    }
    OptimalityCheck {
        violation: (lam * (lo_u0 - hi_u0)).max(0.0),
        tolerance,
    }
}
