#![allow(dead_code)]

use cqcap::channel::random_mixed_state;
use cqcap::{ComplexMatrix, CqChannel, DensityMatrix, InputDistribution};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn diag(d: &[f64]) -> DensityMatrix {
    DensityMatrix::new(ComplexMatrix::from_real_diagonal(d).unwrap()).unwrap()
}

pub fn pure(psi: &[Complex64]) -> DensityMatrix {
    DensityMatrix::new(ComplexMatrix::outer(psi).unwrap()).unwrap()
}

/// Basis-state projectors |i><i| for i < n in dimension n.
pub fn orthogonal_pure(n: usize) -> CqChannel {
    let states = (0..n)
        .map(|i| {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            diag(&d)
        })
        .collect();
    CqChannel::unconstrained(states).unwrap()
}

/// {|0><0|, |+><+|}.
pub fn zero_plus() -> CqChannel {
    let h = 0.5f64.sqrt();
    CqChannel::unconstrained(vec![diag(&[1.0, 0.0]), pure(&[c(h, 0.0), c(h, 0.0)])]).unwrap()
}

pub fn binary_entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -(q * q.log2() + (1.0 - q) * (1.0 - q).log2())
}

/// Closed-form capacity of {|0><0|, |+><+|}: the optimum is uniform by
/// symmetry and the barycenter has eigenvalues (1 +- 1/sqrt 2)/2.
pub fn zero_plus_capacity() -> f64 {
    binary_entropy((1.0 + 0.5f64.sqrt()) / 2.0)
}

pub fn random_distribution(n: usize, rng: &mut impl Rng) -> InputDistribution {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut *rng)).collect();
    InputDistribution::from_weights(&w).unwrap()
}

/// Haar-ish unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(m: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(m, m, |_, _| {
        c(
            StandardNormal.sample(&mut *rng),
            StandardNormal.sample(&mut *rng),
        )
    });
    a.qr().q()
}

/// Random state of dimension `m` and random rank in 1..=m.
pub fn random_state_any_rank(m: usize, rng: &mut impl Rng) -> DensityMatrix {
    let rank = rng.random_range(1..=m);
    let a = DMatrix::from_fn(m, rank, |_, _| {
        c(
            StandardNormal.sample(&mut *rng),
            StandardNormal.sample(&mut *rng),
        )
    });
    let w = &a * a.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(ComplexMatrix::new(w.map(|z| z / tr)).unwrap()).unwrap()
}

/// Random pair sharing a support: sigma is full rank on the range of a
/// random isometry, rho is any state inside that range.
pub fn random_pair_shared_support(m: usize, rng: &mut impl Rng) -> (DensityMatrix, DensityMatrix) {
    let k = rng.random_range(1..=m);
    let u = random_unitary(m, rng);
    let v = u.columns(0, k).into_owned();
    let embed = |inner: &DensityMatrix| {
        let x = &v * inner.matrix().as_matrix() * v.adjoint();
        DensityMatrix::new(ComplexMatrix::new(x).unwrap()).unwrap()
    };
    let sigma = embed(&random_mixed_state(k, rng).unwrap());
    let rho = embed(&random_state_any_rank(k, rng));
    (rho, sigma)
}
