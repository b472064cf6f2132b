//! Fixed-multiplier Blahut-Arimoto iteration for cq channels.
//!
//! For a multiplier `lambda >= 0` the solver maximizes
//! `chi(p) - lambda * s^T p` over the simplex by alternating maximization of
//! the two-argument surrogate `f(p, p')`. One step maps `p^t` to
//!
//! ```text
//! p^{t+1}_x = r_x / sum r,   ln r_x = ln p^t_x + D(rho_x || rho^t) - lambda s_x
//! ```
//!
//! and `log sum r` is the surrogate value `f(p^{t+1}, p^t)`, which never
//! exceeds the optimum. On the other side, for every `p`,
//! `chi(p) - lambda s^T p <= max_x [D(rho_x || rho^t) - lambda s_x]`, so each
//! iterate also certifies an upper bound. The loop stops once the running
//! bounds are within `epsilon`.
//!
//! Iteration arithmetic is in nats on `ln r_x`; every reported value is in
//! bits and `lambda` is in bits per cost unit.

use std::f64::consts::LN_2;

use crate::channel::{output_state, CqChannel, InputDistribution};
use crate::error::{Error, Result};
use crate::hermitian::{relative_entropy_nats, DensityMatrix};

/// Consecutive steps with a value increase below this count toward a stall.
pub const STALL_TOL: f64 = 1e-14;
/// Number of such steps after which the run is reported as stalled.
pub const STALL_WINDOW: usize = 50;
/// Below this (bits) a divergence to the final iterate is not measurable.
pub const MEASURABLE_DIVERGENCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Multiplier on the expected cost, bits per cost unit.
    pub lambda: f64,
    /// Target width of the certified interval, bits.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Record every `trace_every`-th step (the last step is always recorded).
    pub trace_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            epsilon: 1e-6,
            max_iter: 1_000_000,
            trace_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64, epsilon: f64) -> Self {
        Self {
            lambda,
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::BadParams(format!(
                "epsilon {} must be positive",
                self.epsilon
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::BadParams(format!(
                "lambda {} must be finite and >= 0",
                self.lambda
            )));
        }
        if self.max_iter == 0 || self.trace_every == 0 {
            return Err(Error::BadParams(
                "max_iter and trace_every must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Iterate `p^t` with its output state and per-letter divergences.
#[derive(Debug, Clone)]
pub struct IterationState {
    t: usize,
    p: InputDistribution,
    rho: DensityMatrix,
    divergences: Vec<f64>,
}

impl IterationState {
    /// State at `t = 0` for the given distribution.
    pub fn new(ch: &CqChannel, p: InputDistribution) -> Result<Self> {
        Self::at(ch, p, 0)
    }

    fn at(ch: &CqChannel, p: InputDistribution, t: usize) -> Result<Self> {
        let rho = output_state(ch, &p)?;
        let divergences = ch
            .states()
            .iter()
            .map(|state| relative_entropy_nats(state, &rho))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            p,
            rho,
            divergences,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn p(&self) -> &InputDistribution {
        &self.p
    }

    /// `rho^t = sum_x p^t_x rho_x`.
    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    /// `D(rho_x || rho^t)` in nats; `+inf` where the support is not covered.
    pub fn per_letter_divergence(&self) -> &[f64] {
        &self.divergences
    }

    /// `chi(p^t) - lambda s^T p^t` in bits.
    pub fn penalized_holevo(&self, ch: &CqChannel, lambda: f64) -> f64 {
        let mixed: f64 = self
            .p
            .probs()
            .iter()
            .zip(ch.letter_entropies())
            .map(|(p, h)| p * h)
            .sum();
        (self.rho.entropy_nats() - mixed).max(0.0) / LN_2 - lambda * self.p.dot(ch.costs())
    }
}

/// Surrogate `f(p, p')` in bits.
///
/// Evaluated as `sum_x p_x [ln p'_x - ln p_x + D(rho_x || rho')] - lambda s^T p`.
pub fn surrogate_objective(
    ch: &CqChannel,
    lambda: f64,
    p: &InputDistribution,
    p_prime: &InputDistribution,
) -> Result<f64> {
    let rho_prime = output_state(ch, p_prime)?;
    if p.len() != ch.n() {
        return Err(Error::LengthMismatch {
            expected: ch.n(),
            found: p.len(),
        });
    }
    let mut acc = 0.0;
    for (x, (&px, &qx)) in p.probs().iter().zip(p_prime.probs()).enumerate() {
        if px == 0.0 {
            continue;
        }
        if qx == 0.0 {
            return Err(Error::SupportViolation { letter: x });
        }
        let d = relative_entropy_nats(&ch.states()[x], &rho_prime)?;
        if !d.is_finite() {
            return Err(Error::NumericalBreakdown {
                letter: x,
                detail: "state escapes the support of the reference output".into(),
            });
        }
        acc += px * (qx.ln() - px.ln() + d);
    }
    Ok(acc / LN_2 - lambda * p.dot(ch.costs()))
}

/// One Blahut-Arimoto update. Returns the next state and `f(p^{t+1}, p^t)`
/// in bits.
pub fn ba_step(
    ch: &CqChannel,
    lambda: f64,
    state: &IterationState,
) -> Result<(IterationState, f64)> {
    let lambda_nats = lambda * LN_2;
    let mut log_r = Vec::with_capacity(ch.n());
    for (x, ((&px, &d), &s)) in state
        .p
        .probs()
        .iter()
        .zip(&state.divergences)
        .zip(ch.costs())
        .enumerate()
    {
        if px == 0.0 {
            log_r.push(f64::NEG_INFINITY);
            continue;
        }
        let v = px.ln() + d - lambda_nats * s;
        if !v.is_finite() {
            return Err(Error::NumericalBreakdown {
                letter: x,
                detail: format!("ln r = {v} (divergence {d})"),
            });
        }
        log_r.push(v);
    }
    let top = log_r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_total = top + log_r.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
    let mut next: Vec<f64> = log_r.iter().map(|v| (v - log_total).exp()).collect();
    let total: f64 = next.iter().sum();
    for q in next.iter_mut() {
        *q /= total;
    }
    let next = IterationState::at(ch, InputDistribution::new(next)?, state.t + 1)?;
    Ok((next, log_total / LN_2))
}

/// `max_x [D(rho_x || rho^t) - lambda s_x]` in bits, an upper bound on the
/// optimal penalized value.
pub fn upper_bound(ch: &CqChannel, lambda: f64, state: &IterationState) -> f64 {
    state
        .divergences
        .iter()
        .zip(ch.costs())
        .map(|(d, s)| d / LN_2 - lambda * s)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GapReached,
    MaxIter,
    Stalled,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::GapReached => "gap_reached",
            Termination::MaxIter => "max_iter",
            Termination::Stalled => "stalled",
        }
    }
}

/// One recorded step `t >= 1`, producing `p^t` from `p^{t-1}`.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub t: usize,
    /// `f(p^t, p^{t-1})`, bits.
    pub f_bits: f64,
    /// Best certified lower bound so far, bits.
    pub lower_bits: f64,
    /// Best certified upper bound so far, bits.
    pub upper_bits: f64,
    /// `s^T p^t`.
    pub expected_cost: f64,
    /// `||p^t - p^{t-1}||_1`.
    pub l1_step: f64,
    pub p: InputDistribution,
    /// `D(p_final || p^t)` in bits, filled by [`rate_diagnostics`].
    pub divergence_to_final: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn f_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.f_bits)
    }
}

#[derive(Debug, Clone)]
pub struct FixedLambdaResult {
    pub lambda: f64,
    pub p: InputDistribution,
    /// `f(p, p) = chi(p) - lambda s^T p` at the final distribution, bits.
    pub f_value: f64,
    /// Certified interval for the optimal penalized value, bits.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub expected_cost: f64,
    pub iterations: usize,
    pub termination: Termination,
}

impl FixedLambdaResult {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }
}

/// Runs the iteration from `initial` (uniform when `None`) until the
/// certified gap drops to `epsilon`, the value stalls, or `max_iter` is hit.
pub fn solve_fixed_lambda(
    ch: &CqChannel,
    config: &SolverConfig,
    initial: Option<&InputDistribution>,
) -> Result<(FixedLambdaResult, IterationTrace)> {
    config.validate()?;
    let lambda = config.lambda;
    let p0 = match initial {
        None => InputDistribution::uniform(ch.n()),
        Some(p) => {
            if p.len() != ch.n() {
                return Err(Error::LengthMismatch {
                    expected: ch.n(),
                    found: p.len(),
                });
            }
            if p.probs().iter().any(|&q| q <= 0.0) {
                return Err(Error::BadParams(
                    "initial distribution must be strictly positive".into(),
                ));
            }
            p.clone()
        }
    };

    let mut state = IterationState::new(ch, p0)?;
    let mut best_upper = upper_bound(ch, lambda, &state);
    let mut best_lower = f64::NEG_INFINITY;
    let mut prev_f = f64::NEG_INFINITY;
    let mut stalled_steps = 0;
    let mut trace = IterationTrace::default();
    let mut termination = Termination::MaxIter;
    let mut iterations = 0;

    for k in 1..=config.max_iter {
        let (next, f) = ba_step(ch, lambda, &state)?;
        iterations = k;
        best_lower = best_lower.max(f);
        best_upper = best_upper.min(upper_bound(ch, lambda, &next));

        if f - prev_f < STALL_TOL {
            stalled_steps += 1;
        } else {
            stalled_steps = 0;
        }
        prev_f = f;

        let done = if best_upper - best_lower <= config.epsilon {
            Some(Termination::GapReached)
        } else if stalled_steps >= STALL_WINDOW {
            Some(Termination::Stalled)
        } else {
            None
        };

        if k % config.trace_every == 0 || done.is_some() || k == config.max_iter {
            trace.records.push(TraceRecord {
                t: k,
                f_bits: f,
                lower_bits: best_lower,
                upper_bits: best_upper,
                expected_cost: next.p.dot(ch.costs()),
                l1_step: next.p.l1_distance(&state.p),
                p: next.p.clone(),
                divergence_to_final: None,
            });
        }
        state = next;
        if let Some(reason) = done {
            termination = reason;
            break;
        }
    }

    let f_value = state.penalized_holevo(ch, lambda);
    let lower_bound = best_lower.max(f_value);
    let result = FixedLambdaResult {
        lambda,
        expected_cost: state.p.dot(ch.costs()),
        p: state.p,
        f_value,
        lower_bound,
        upper_bound: best_upper.max(lower_bound),
        iterations,
        termination,
    };
    Ok((result, trace))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateDiagnostics {
    /// `F_hat - f_t <= log2(n) / t` held on every recorded step.
    pub sublinear_ok: bool,
    pub sublinear_violations: usize,
    /// Largest `D(p_final || p^{t+1}) / D(p_final || p^t)` over the last
    /// quarter of the measurable steps; 1.0 when none is measurable.
    pub geometric_ratio_tail: f64,
}

/// Fills `divergence_to_final` and checks the convergence-rate guarantees.
///
/// `F_hat` is the upper bound of the last record.
pub fn rate_diagnostics(
    trace: &mut IterationTrace,
    p_final: &InputDistribution,
    n: usize,
) -> Result<RateDiagnostics> {
    let last = trace.records.last().ok_or(Error::EmptyTrace)?;
    let f_hat = last.upper_bits;
    let log_n = (n as f64).log2();

    let mut violations = 0;
    for rec in trace.records.iter_mut() {
        rec.divergence_to_final = Some(p_final.divergence_bits(&rec.p));
        // absolute slack covers rounding when the bound is 0 (n = 1)
        if f_hat - rec.f_bits > log_n / rec.t as f64 + 1e-12 {
            violations += 1;
        }
    }

    // the last quarter of the pairs whose denominator is still above the
    // rounding floor; fast runs reach the floor long before the trace ends
    let ratios: Vec<f64> = trace
        .records
        .windows(2)
        .filter_map(|pair| {
            let before = pair[0].divergence_to_final.unwrap_or(0.0);
            let after = pair[1].divergence_to_final.unwrap_or(0.0);
            (before >= MEASURABLE_DIVERGENCE).then(|| after / before)
        })
        .collect();
    let start = 3 * ratios.len() / 4;
    let ratio = ratios[start..].iter().copied().reduce(f64::max);

    Ok(RateDiagnostics {
        sublinear_ok: violations == 0,
        sublinear_violations: violations,
        geometric_ratio_tail: ratio.unwrap_or(1.0),
    })
}
