//! Capacity under a linear cost constraint `s^T p <= S`.
//!
//! The constrained optimum is found on the dual side: for each multiplier
//! `lambda` the fixed-multiplier solver gives `F(lambda)` and an optimizer
//! `p*(lambda)` whose expected cost is non-increasing in `lambda`. Bisection
//! on `lambda` drives the expected cost onto the budget, and the capacity is
//! `F(lambda) + lambda S`. If the unconstrained optimizer already meets the
//! budget the constraint is inactive and `lambda = 0`.

use crate::channel::{CqChannel, InputDistribution};
use crate::error::{Error, Result};
use crate::solver::{
    solve_fixed_lambda, FixedLambdaResult, IterationTrace, SolverConfig, Termination,
};

/// Bracketing gives up once the multiplier exceeds this.
pub const LAMBDA_MAX: f64 = 18_446_744_073_709_551_616.0; // 2^64
/// Relative width at which the multiplier interval counts as collapsed.
pub const LAMBDA_TOL: f64 = 1e-12;

/// Tolerance on `|s^T p - S|`, in cost units.
pub fn cost_tol(epsilon: f64) -> f64 {
    epsilon.max(1e-8)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityOptions {
    /// Target accuracy in bits.
    pub epsilon: f64,
    /// Iteration cap for each inner solve.
    pub max_iter: usize,
    pub trace_every: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iter: 1_000_000,
            trace_every: 1,
        }
    }
}

impl CapacityOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    fn inner(&self, lambda: f64, epsilon: f64) -> SolverConfig {
        SolverConfig {
            lambda,
            epsilon,
            max_iter: self.max_iter,
            trace_every: self.trace_every,
        }
    }
}

/// One inner solve during the multiplier search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEvaluation {
    pub lambda: f64,
    pub expected_cost: f64,
    /// `chi(p) - lambda s^T p` at the returned distribution, bits.
    pub f_value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// Bits.
    pub capacity: f64,
    pub p: InputDistribution,
    /// Bits per cost unit.
    pub lambda: f64,
    pub expected_cost: f64,
    pub constraint_active: bool,
    /// `[lower, upper]` in bits.
    pub gap_certificate: [f64; 2],
    /// Inner solves after the initial `lambda = 0` one.
    pub outer_iterations: usize,
    /// Total Blahut-Arimoto steps over all inner solves.
    pub inner_iterations: usize,
    /// Termination of the inner solve that produced `p`.
    pub termination: Termination,
    /// Every inner solve, in evaluation order.
    pub evaluations: Vec<LambdaEvaluation>,
    /// Trace of the inner solve that produced `p`.
    pub trace: IterationTrace,
}

impl CapacityResult {
    /// Number of evaluated pairs where a larger multiplier gave a larger
    /// expected cost by more than `slack`.
    pub fn cost_monotonicity_violations(&self, slack: f64) -> usize {
        let mut evals = self.evaluations.clone();
        evals.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let mut violations = 0;
        for (i, a) in evals.iter().enumerate() {
            for b in &evals[i + 1..] {
                if b.lambda > a.lambda && b.expected_cost > a.expected_cost + slack {
                    violations += 1;
                }
            }
        }
        violations
    }
}

fn validate_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::BadParams(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    Ok(())
}

/// Capacity without a cost constraint (`lambda = 0`).
pub fn unconstrained_capacity(ch: &CqChannel, options: &CapacityOptions) -> Result<CapacityResult> {
    validate_epsilon(options.epsilon)?;
    let (res, trace) = solve_fixed_lambda(ch, &options.inner(0.0, options.epsilon), None)?;
    let evaluation = evaluation_of(&res);
    Ok(CapacityResult {
        capacity: res.f_value,
        lambda: 0.0,
        expected_cost: res.expected_cost,
        constraint_active: false,
        gap_certificate: [res.lower_bound, res.upper_bound],
        outer_iterations: 0,
        inner_iterations: res.iterations,
        termination: res.termination,
        evaluations: vec![evaluation],
        p: res.p,
        trace,
    })
}

fn evaluation_of(res: &FixedLambdaResult) -> LambdaEvaluation {
    LambdaEvaluation {
        lambda: res.lambda,
        expected_cost: res.expected_cost,
        f_value: res.f_value,
        iterations: res.iterations,
    }
}

/// Holevo quantity at the solve's distribution, bits.
fn primal_value(res: &FixedLambdaResult) -> f64 {
    res.f_value + res.lambda * res.expected_cost
}

/// Strictly positive start for warm-starting the next inner solve.
fn warm_start(p: &InputDistribution) -> InputDistribution {
    if p.probs().iter().all(|&q| q > 0.0) {
        return p.clone();
    }
    const MIX: f64 = 1e-12;
    let n = p.len() as f64;
    let w: Vec<f64> = p
        .probs()
        .iter()
        .map(|q| (1.0 - MIX) * q + MIX / n)
        .collect();
    InputDistribution::from_weights(&w).expect("mixture with uniform is a distribution")
}

struct Search<'a> {
    ch: &'a CqChannel,
    options: &'a CapacityOptions,
    inner_eps: f64,
    evaluations: Vec<LambdaEvaluation>,
    inner_iterations: usize,
    last_p: Option<InputDistribution>,
}

impl Search<'_> {
    fn solve(&mut self, lambda: f64) -> Result<(FixedLambdaResult, IterationTrace)> {
        let start = self.last_p.as_ref().map(warm_start);
        let (res, trace) = solve_fixed_lambda(
            self.ch,
            &self.options.inner(lambda, self.inner_eps),
            start.as_ref(),
        )?;
        self.evaluations.push(evaluation_of(&res));
        self.inner_iterations += res.iterations;
        self.last_p = Some(res.p.clone());
        Ok((res, trace))
    }
}

/// Capacity subject to `s^T p <= limit`.
pub fn constrained_capacity(
    ch: &CqChannel,
    limit: f64,
    options: &CapacityOptions,
) -> Result<CapacityResult> {
    validate_epsilon(options.epsilon)?;
    if !limit.is_finite() {
        return Err(Error::BadParams(format!(
            "cost limit {limit} is not finite"
        )));
    }
    let min_cost = ch.min_cost();
    if limit < min_cost {
        return Err(Error::InfeasibleCost { limit, min_cost });
    }
    let tol = cost_tol(options.epsilon);
    let mut search = Search {
        ch,
        options,
        inner_eps: options.epsilon / 2.0,
        evaluations: Vec::new(),
        inner_iterations: 0,
        last_p: None,
    };

    let (at_zero, zero_trace) = search.solve(0.0)?;
    if at_zero.expected_cost <= limit + tol {
        return Ok(CapacityResult {
            capacity: at_zero.f_value,
            lambda: 0.0,
            expected_cost: at_zero.expected_cost,
            constraint_active: false,
            gap_certificate: [at_zero.lower_bound, at_zero.upper_bound],
            outer_iterations: 0,
            inner_iterations: search.inner_iterations,
            termination: at_zero.termination,
            evaluations: search.evaluations,
            p: at_zero.p,
            trace: zero_trace,
        });
    }

    let mut outer = 0;
    let mut lo = (at_zero, zero_trace);
    let mut hi_lambda = 1.0;
    let mut hi = loop {
        if hi_lambda > LAMBDA_MAX {
            return Err(Error::BracketFailure {
                limit,
                lambda_max: LAMBDA_MAX,
            });
        }
        let r = search.solve(hi_lambda)?;
        outer += 1;
        if r.0.expected_cost <= limit + tol {
            break r;
        }
        lo = r;
        hi_lambda *= 2.0;
    };

    enum Outcome {
        Met(FixedLambdaResult, IterationTrace),
        Collapsed(FixedLambdaResult, IterationTrace),
    }
    let outcome = loop {
        if (hi.0.expected_cost - limit).abs() <= tol {
            break Outcome::Met(hi.0, hi.1);
        }
        let (l, h) = (lo.0.lambda, hi.0.lambda);
        if h - l <= LAMBDA_TOL * h {
            break Outcome::Collapsed(hi.0, hi.1);
        }
        let r = search.solve(0.5 * (l + h))?;
        outer += 1;
        if (r.0.expected_cost - limit).abs() <= tol {
            break Outcome::Met(r.0, r.1);
        }
        if r.0.expected_cost > limit {
            lo = r;
        } else {
            hi = r;
        }
    };

    let (res, trace, capacity, gap) = match outcome {
        Outcome::Met(res, trace) => {
            let shift = res.lambda * limit;
            let capacity = res.f_value + shift;
            let gap = [res.lower_bound + shift, res.upper_bound + shift];
            (res, trace, capacity, gap)
        }
        Outcome::Collapsed(res, trace) => {
            // s^T p*(lambda) jumps across the budget: keep the feasible end
            // and widen the certificate over both endpoint primal values.
            let shift = res.lambda * limit;
            let capacity = res.f_value + shift;
            let ends = [primal_value(&lo.0), primal_value(&res)];
            let lower = ends.iter().copied().fold(res.lower_bound + shift, f64::min);
            let upper = ends.iter().copied().fold(res.upper_bound + shift, f64::max);
            (res, trace, capacity, [lower, upper])
        }
    };

    Ok(CapacityResult {
        capacity,
        lambda: res.lambda,
        expected_cost: res.expected_cost,
        constraint_active: true,
        gap_certificate: gap,
        outer_iterations: outer,
        inner_iterations: search.inner_iterations,
        termination: res.termination,
        evaluations: search.evaluations,
        p: res.p,
        trace,
    })
}
