//! Classical-quantum channels `x -> rho_x` with per-letter costs.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::hermitian::{relative_entropy_nats, trace_product, ComplexMatrix, DensityMatrix};

/// Tolerance on `sum p - 1` for a probability vector.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Probability vector on the input alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution(Vec<f64>);

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::BadDistribution("empty".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::BadDistribution(format!("entry {bad}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::BadDistribution(format!("sums to {total}")));
        }
        Ok(Self(probs))
    }

    /// Normalizes nonnegative weights onto the simplex.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::BadDistribution(format!("weights sum to {total}")));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, letter: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[letter] = 1.0;
        Self(probs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `sum_x s_x p_x`.
    pub fn dot(&self, costs: &[f64]) -> f64 {
        self.0.iter().zip(costs).map(|(p, s)| p * s).sum()
    }

    /// Classical relative entropy `D(self || other)` in bits.
    ///
    /// Summed as `p ln(p/q) - p + q`, each term nonnegative, so values near
    /// zero keep their relative accuracy.
    pub fn divergence_bits(&self, other: &InputDistribution) -> f64 {
        let mut d = 0.0;
        for (&p, &q) in self.0.iter().zip(&other.0) {
            if p == 0.0 {
                d += q;
            } else if q <= 0.0 {
                return f64::INFINITY;
            } else {
                let r = (p - q) / q;
                // ln_1p keeps small divergences accurate; it rounds to -inf as p/q -> 0
                let log = if r.abs() < 0.5 {
                    r.ln_1p()
                } else {
                    (p / q).ln()
                };
                d += p * log - p + q;
            }
        }
        d.max(0.0) / LN_2
    }

    pub fn l1_distance(&self, other: &InputDistribution) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// A cq channel: states `rho_x` of common dimension plus nonnegative costs.
#[derive(Debug, Clone)]
pub struct CqChannel {
    states: Vec<DensityMatrix>,
    costs: Vec<f64>,
    letter_entropies: Vec<f64>,
    gram: DMatrix<f64>,
}

impl CqChannel {
    pub fn new(states: Vec<DensityMatrix>, costs: Vec<f64>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::BadChannel("no states".into()));
        };
        let m = first.dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.dim(),
            });
        }
        if costs.len() != states.len() {
            return Err(Error::LengthMismatch {
                expected: states.len(),
                found: costs.len(),
            });
        }
        if let Some(bad) = costs.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(Error::BadChannel(format!(
                "cost {bad} is not a nonnegative number"
            )));
        }
        let n = states.len();
        let letter_entropies = states.iter().map(DensityMatrix::entropy_nats).collect();
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = trace_product(states[i].matrix(), states[j].matrix())?.re;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        Ok(Self {
            states,
            costs,
            letter_entropies,
            gram,
        })
    }

    /// Channel with all costs zero.
    pub fn unconstrained(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len();
        Self::new(states, vec![0.0; n])
    }

    /// Same states, new cost vector.
    pub fn with_costs(&self, costs: Vec<f64>) -> Result<Self> {
        Self::new(self.states.clone(), costs)
    }

    /// Alphabet size.
    pub fn n(&self) -> usize {
        self.states.len()
    }

    /// Output dimension.
    pub fn m(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// `H(rho_x)` in nats.
    pub fn letter_entropies(&self) -> &[f64] {
        &self.letter_entropies
    }

    /// `M_ij = Tr(rho_i rho_j)`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn min_cost(&self) -> f64 {
        self.costs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check_len(&self, p: &InputDistribution) -> Result<()> {
        if p.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: p.len(),
            });
        }
        Ok(())
    }
}

/// `sum_x p_x rho_x`.
pub fn output_state(ch: &CqChannel, p: &InputDistribution) -> Result<DensityMatrix> {
    ch.check_len(p)?;
    let m = ch.m();
    let mut acc = DMatrix::<Complex64>::zeros(m, m);
    for (rho, &px) in ch.states.iter().zip(p.probs()) {
        if px > 0.0 {
            acc += rho.matrix().as_matrix().scale(px);
        }
    }
    DensityMatrix::new(ComplexMatrix::new(acc)?)
}

fn holevo_nats(ch: &CqChannel, p: &InputDistribution, rho: &DensityMatrix) -> f64 {
    let mixed: f64 = p
        .probs()
        .iter()
        .zip(&ch.letter_entropies)
        .map(|(px, h)| px * h)
        .sum();
    (rho.entropy_nats() - mixed).max(0.0)
}

/// Holevo quantity `H(sum p_x rho_x) - sum p_x H(rho_x)` in bits.
pub fn holevo_quantity(ch: &CqChannel, p: &InputDistribution) -> Result<f64> {
    let rho = output_state(ch, p)?;
    let chi = holevo_nats(ch, p, &rho) / LN_2;
    #[cfg(debug_assertions)]
    {
        let alt = divergence_form_nats(ch, p, &rho)? / LN_2;
        debug_assert!(
            (chi - alt).abs() <= 1e-8,
            "Holevo forms disagree: {chi} vs {alt}"
        );
    }
    Ok(chi)
}

/// Holevo quantity through `sum_x p_x D(rho_x || rho)`, in bits.
pub fn holevo_via_divergence(ch: &CqChannel, p: &InputDistribution) -> Result<f64> {
    let rho = output_state(ch, p)?;
    Ok(divergence_form_nats(ch, p, &rho)? / LN_2)
}

fn divergence_form_nats(ch: &CqChannel, p: &InputDistribution, rho: &DensityMatrix) -> Result<f64> {
    let mut acc = 0.0;
    for (state, &px) in ch.states.iter().zip(p.probs()) {
        if px > 0.0 {
            acc += px * relative_entropy_nats(state, rho)?;
        }
    }
    Ok(acc)
}

/// Result of the linear-independence diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependenceReport {
    pub independent: bool,
    pub min_gram_eigenvalue: f64,
}

/// Checks linear independence of the output states through the Gram matrix.
///
/// Threshold is `1e-10 * Tr(M)`.
pub fn independence_check(ch: &CqChannel) -> IndependenceReport {
    let eig = SymmetricEigen::new(ch.gram.clone());
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let threshold = 1e-10 * ch.gram.trace();
    IndependenceReport {
        independent: min > threshold,
        min_gram_eigenvalue: min,
    }
}

/// Family of random states used by [`random_channel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Rank-one projectors on Gaussian random vectors.
    Pure,
    /// `A A^dagger / Tr` for a Gaussian square `A`.
    Mixed,
    /// Diagonal states, i.e. an embedded classical channel.
    Diagonal,
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(Self::Pure),
            "mixed" => Ok(Self::Mixed),
            "diagonal" => Ok(Self::Diagonal),
            other => Err(Error::BadParams(format!("unknown ensemble kind {other:?}"))),
        }
    }
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(
        StandardNormal.sample(&mut *rng),
        StandardNormal.sample(&mut *rng),
    )
}

/// Random pure state of dimension `m`.
pub fn random_pure_state(m: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let mut psi: Vec<Complex64> = (0..m).map(|_| gaussian(rng)).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in psi.iter_mut() {
        *z /= norm;
    }
    DensityMatrix::new(ComplexMatrix::outer(&psi)?)
}

/// Random full-rank (almost surely) mixed state of dimension `m`.
pub fn random_mixed_state(m: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let a = DMatrix::from_fn(m, m, |_, _| gaussian(rng));
    let w = &a * a.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(ComplexMatrix::new(w.map(|z| z / tr))?)
}

/// Random diagonal state (a random probability row on the diagonal).
pub fn random_diagonal_state(m: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let w: Vec<f64> = (0..m).map(|_| Exp1.sample(&mut *rng)).collect();
    let total: f64 = w.iter().sum();
    let d: Vec<f64> = w.iter().map(|x| x / total).collect();
    DensityMatrix::new(ComplexMatrix::from_real_diagonal(&d)?)
}

/// Deterministic random channel with zero costs.
pub fn random_channel(n: usize, m: usize, seed: u64, kind: EnsembleKind) -> Result<CqChannel> {
    if n == 0 || m == 0 {
        return Err(Error::BadParams(format!(
            "n = {n}, m = {m} must be positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..n)
        .map(|_| match kind {
            EnsembleKind::Pure => random_pure_state(m, &mut rng),
            EnsembleKind::Mixed => random_mixed_state(m, &mut rng),
            EnsembleKind::Diagonal => random_diagonal_state(m, &mut rng),
        })
        .collect::<Result<Vec<_>>>()?;
    CqChannel::unconstrained(states)
}

/// Deterministic costs in `[0, 1)`, drawn from a stream separate from the
/// one `random_channel` uses for the same seed.
pub fn random_costs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc057_c057_c057_c057);
    (0..n).map(|_| rng.random::<f64>()).collect()
}
