//! Brute-force reference computations shared by the integration tests.

#![allow(dead_code)]

use tvgam::solver::ProxProblem;

/// Maximum of `sum g_t v_t` over grid values `v_t = k_t / units` with
/// `|v_1| + sum |v_t - v_{t+1}| + |v_m| <= 1`, by dynamic programming over
/// (current value, budget spent) in grid units.
pub fn grid_sup(gammas: &[f64], units: i64) -> f64 {
    let half = units / 2;
    let h = 1.0 / units as f64;
    let width = (2 * half + 1) as usize;
    let stride = units as usize + 1;
    let idx = |k: i64, b: i64| (k + half) as usize * stride + b as usize;
    let mut best = vec![f64::NEG_INFINITY; width * stride];
    for k in -half..=half {
        best[idx(k, k.abs())] = gammas[0] * k as f64 * h;
    }
    for &g in &gammas[1..] {
        let mut next = vec![f64::NEG_INFINITY; best.len()];
        for k in -half..=half {
            for b in 0..=units {
                let cur = best[idx(k, b)];
                if cur == f64::NEG_INFINITY {
                    continue;
                }
                for k2 in -half..=half {
                    let b2 = b + (k2 - k).abs();
                    if b2 > units {
                        continue;
                    }
                    let val = cur + g * k2 as f64 * h;
                    let slot = &mut next[idx(k2, b2)];
                    if val > *slot {
                        *slot = val;
                    }
                }
            }
        }
        best = next;
    }
    let mut out = f64::NEG_INFINITY;
    for k in -half..=half {
        for b in 0..=units - k.abs() {
            out = out.max(best[idx(k, b)]);
        }
    }
    out
}

/// Exact minimizer of a prox problem over values `k / units` with
/// `|k| <= range * units`, by min-sum dynamic programming along the chain.
pub fn grid_prox(problem: &ProxProblem, units: f64, range: f64) -> Vec<f64> {
    let span = (range * units).round() as i64;
    let ks: Vec<f64> = (-span..=span).map(|k| k as f64 / units).collect();
    let g = ks.len();
    let n = problem.z.len();
    let lam = problem.lam;
    let unary = |t: usize, v: f64| 0.5 * problem.weights[t] * (v - problem.z[t]).powi(2);
    let mut cost: Vec<f64> = ks.iter().map(|&v| unary(0, v) + lam * v.abs()).collect();
    let mut back = vec![vec![0usize; g]; n];
    for t in 1..n {
        let mut next = vec![f64::INFINITY; g];
        for (b, &vb) in ks.iter().enumerate() {
            for (a, &va) in ks.iter().enumerate() {
                let c = cost[a] + lam * (vb - va).abs();
                if c < next[b] {
                    next[b] = c;
                    back[t][b] = a;
                }
            }
            next[b] += unary(t, vb);
        }
        cost = next;
    }
    let (mut arg, _) = ks
        .iter()
        .enumerate()
        .map(|(a, &v)| (a, cost[a] + lam * v.abs()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let mut v = vec![0.0; n];
    for t in (0..n).rev() {
        v[t] = ks[arg];
        arg = back[t][arg];
    }
    v
}
