//! Brute-force reference values.
//!
//! Nothing here touches the iteration in [`crate::solver`]: the grid search
//! evaluates the Holevo quantity through [`crate::channel`] directly, and the
//! classical Blahut-Arimoto routine works on a plain transition matrix.

use std::f64::consts::LN_2;

use crate::channel::{holevo_quantity, CqChannel, InputDistribution};
use crate::error::{Error, Result};

/// Largest alphabet the grid search accepts.
pub const MAX_GRID_ALPHABET: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Grid step is `1 / resolution`.
    pub resolution: usize,
    /// When set, maximize `chi(p) - lambda s^T p` instead of `chi(p)`.
    pub penalty_lambda: Option<f64>,
}

impl GridSpec {
    pub fn new(resolution: usize) -> Self {
        Self {
            resolution,
            penalty_lambda: None,
        }
    }

    /// Default resolution for an alphabet of size `n`.
    pub fn default_for(n: usize) -> Self {
        Self::new(match n {
            0..=2 => 1000,
            3 => 200,
            _ => 60,
        })
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    /// Bits.
    pub value: f64,
    pub argmax: InputDistribution,
    /// Heuristic bound on how far `value` can sit below the true optimum.
    pub slack: f64,
}

fn binary_entropy_bits(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -(q * q.log2() + (1.0 - q) * (1.0 - q).log2())
}

/// Continuity slack for a grid of step `1/k`.
///
/// Rounding the optimizer to the grid moves it by at most `n/k` in l1, so
/// the output state moves by at most `T = n/(2k)` in trace distance. A
/// Fannes-type estimate then gives `T log2 m + h(T)` for the output entropy
/// plus `(n/k) log2 m` for the average letter entropy.
pub fn grid_slack(n: usize, m: usize, k: usize) -> f64 {
    let shift = n as f64 / k as f64;
    let t = (shift / 2.0).min(0.5);
    let log_m = (m.max(2) as f64).log2();
    t * log_m + binary_entropy_bits(t) + shift * log_m
}

/// Calls `visit` on every composition of `k` into `n` nonnegative parts.
fn for_each_composition(n: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(parts: &mut Vec<usize>, n: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
        if parts.len() + 1 == n {
            parts.push(left);
            visit(parts);
            parts.pop();
            return;
        }
        for a in 0..=left {
            parts.push(a);
            rec(parts, n, left - a, visit);
            parts.pop();
        }
    }
    rec(&mut Vec::with_capacity(n), n, k, visit);
}

/// Exhaustive search over distributions with entries in multiples of `1/k`.
///
/// With `limit`, grid points with `s^T p > limit` are skipped.
pub fn grid_capacity(ch: &CqChannel, spec: &GridSpec, limit: Option<f64>) -> Result<GridResult> {
    let n = ch.n();
    if n > MAX_GRID_ALPHABET {
        return Err(Error::AlphabetTooLarge {
            n,
            max: MAX_GRID_ALPHABET,
        });
    }
    let k = spec.resolution;
    if k < 2 {
        return Err(Error::BadParams(format!(
            "grid resolution {k} must be >= 2"
        )));
    }
    let lambda = spec.penalty_lambda.unwrap_or(0.0);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut failure = None;
    for_each_composition(n, k, &mut |parts| {
        if failure.is_some() {
            return;
        }
        let probs: Vec<f64> = parts.iter().map(|&a| a as f64 / k as f64).collect();
        let cost: f64 = probs.iter().zip(ch.costs()).map(|(p, s)| p * s).sum();
        if let Some(s) = limit {
            if cost > s + 1e-12 {
                return;
            }
        }
        let p = match InputDistribution::new(probs) {
            Ok(p) => p,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        match holevo_quantity(ch, &p) {
            Ok(chi) => {
                let value = chi - lambda * cost;
                if best.as_ref().is_none_or(|(b, _)| value > *b) {
                    best = Some((value, p.into_vec()));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (value, argmax) = best.ok_or(Error::NoFeasibleGridPoint)?;
    Ok(GridResult {
        value,
        argmax: InputDistribution::new(argmax)?,
        slack: grid_slack(n, ch.m(), k),
    })
}

/// Classical Blahut-Arimoto capacity of a row-stochastic transition matrix,
/// in bits, to within `epsilon`.
pub fn classical_ba(transition: &[Vec<f64>], epsilon: f64) -> Result<f64> {
    let n = transition.len();
    if n == 0 {
        return Err(Error::BadParams("empty transition matrix".into()));
    }
    let m = transition[0].len();
    for (row, w) in transition.iter().enumerate() {
        if w.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                found: w.len(),
            });
        }
        let sum: f64 = w.iter().sum();
        if w.iter().any(|&v| v < 0.0 || !v.is_finite()) || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::NotStochastic { row, sum });
        }
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::BadParams(format!(
            "epsilon {epsilon} must be positive"
        )));
    }

    let mut p = vec![1.0 / n as f64; n];
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_upper = f64::INFINITY;
    for _ in 0..1_000_000 {
        let q: Vec<f64> = (0..m)
            .map(|y| (0..n).map(|x| p[x] * transition[x][y]).sum())
            .collect();
        // c_x = exp(D(W_x || q)) in nats
        let c: Vec<f64> = transition
            .iter()
            .map(|w| {
                let d: f64 = w
                    .iter()
                    .zip(&q)
                    .filter(|(&wy, _)| wy > 0.0)
                    .map(|(&wy, &qy)| wy * (wy / qy).ln())
                    .sum();
                d.exp()
            })
            .collect();
        let total: f64 = p.iter().zip(&c).map(|(a, b)| a * b).sum();
        let lower = total.ln() / LN_2;
        let upper = c.iter().copied().fold(0.0, f64::max).ln() / LN_2;
        best_lower = best_lower.max(lower);
        best_upper = best_upper.min(upper);
        if best_upper - best_lower <= epsilon {
            break;
        }
        for (px, cx) in p.iter_mut().zip(&c) {
            *px *= cx / total;
        }
    }
    Ok(0.5 * (best_lower + best_upper).max(0.0))
}

/// Transition matrix of a channel whose states are all diagonal.
pub fn diagonal_transition(ch: &CqChannel) -> Result<Vec<Vec<f64>>> {
    let m = ch.m();
    ch.states()
        .iter()
        .enumerate()
        .map(|(x, s)| {
            let mat = s.matrix().as_matrix();
            for i in 0..m {
                for j in 0..m {
                    if i != j && mat[(i, j)].norm() > 0.0 {
                        return Err(Error::BadChannel(format!("state {x} is not diagonal")));
                    }
                }
            }
            Ok((0..m).map(|i| mat[(i, i)].re).collect())
        })
        .collect()
}
