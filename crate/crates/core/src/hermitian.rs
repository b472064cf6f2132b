//! Dense Hermitian matrix services.
//!
//! Density matrices are validated once and carry their eigendecomposition,
//! the matrix logarithm on the support, the kernel projector and the von
//! Neumann entropy. Everything downstream (Holevo quantity, relative entropy,
//! the iteration) reads those caches instead of decomposing again.
//!
//! Entropies are reported in bits at the public surface; the `_nats`
//! variants exist for the iteration internals and for inequalities whose
//! constants depend on the logarithm base.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Numerical tolerances used when validating density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed asymmetry `max |A - A^dagger|`, relative to `max(1, max |A|)`.
    pub herm: f64,
    /// Allowed `|Tr A - 1|`.
    pub trace: f64,
    /// Eigenvalues at or below `eig_rel * lambda_max` count as zero.
    pub eig_rel: f64,
    /// `Tr[rho P_ker(sigma)]` above this marks a support violation.
    pub support: f64,
    /// Allowed entrywise error of `V diag(lambda) V^dagger`.
    pub recon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            trace: 1e-9,
            eig_rel: 1e-12,
            support: 1e-10,
            recon: 1e-9,
        }
    }
}

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::NotSquare {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        if inner.nrows() == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let z = inner[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(inner))
    }

    /// Builds a matrix from row-major rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let m = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::NotSquare {
                rows: m,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let m = diag.len();
        Self::new(DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(m: usize) -> Self {
        Self(DMatrix::identity(m, m))
    }

    pub fn zeros(m: usize) -> Self {
        Self(DMatrix::zeros(m, m))
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn outer(psi: &[Complex64]) -> Result<Self> {
        let m = psi.len();
        Self::new(DMatrix::from_fn(m, m, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `max_ij |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn asymmetry(&self) -> f64 {
        let m = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..m {
            for i in 0..=j {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    rank: usize,
    zero_tol: f64,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are orthonormal eigenvectors, in the order of `eigenvalues`.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Threshold below which an eigenvalue was treated as zero.
    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let c = f(lam);
            scaled.column_mut(k).scale_mut(c);
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// Validated density matrix with cached spectral data.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    spectrum: Spectrum,
    log: ComplexMatrix,
    kernel: Option<ComplexMatrix>,
    entropy_nats: f64,
    tol: Tolerances,
}

impl DensityMatrix {
    /// Validates with default tolerances.
    pub fn new(raw: ComplexMatrix) -> Result<Self> {
        validate_density(raw, &Tolerances::default())
    }

    pub fn maximally_mixed(m: usize) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(&vec![1.0 / m as f64; m])?)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn rank(&self) -> usize {
        self.spectrum.rank
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn entropy_nats(&self) -> f64 {
        self.entropy_nats
    }

    /// Projector onto the kernel, `None` when full rank.
    pub fn kernel_projector(&self) -> Option<&ComplexMatrix> {
        self.kernel.as_ref()
    }
}

/// Symmetrizes, decomposes and checks a candidate density matrix.
///
/// Eigenvalues within `eig_rel * lambda_max` of zero are clamped to zero and,
/// when that changes anything, the matrix is rebuilt from the renormalized
/// spectrum. Anything more negative is rejected.
pub fn validate_density(raw: ComplexMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    let m = raw.dim();
    let asym = raw.asymmetry();
    if asym > tol.herm * raw.max_abs().max(1.0) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let a = raw.as_matrix();
    let herm = (a + a.adjoint()).scale(0.5);
    let trace = herm.trace().re;
    if (trace - 1.0).abs() > tol.trace {
        return Err(Error::BadTrace { trace });
    }

    let eig =
        SymmetricEigen::try_new(herm.clone(), f64::EPSILON, 10_000).ok_or(Error::Decomposition)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(m, m, |i, j| eig.eigenvectors[(i, order[j])]);

    let zero_tol = tol.eig_rel * eigenvalues[0].max(0.0);
    let smallest = eigenvalues[m - 1];
    if smallest < -zero_tol {
        return Err(Error::NotPsd {
            eigenvalue: smallest,
        });
    }
    let mut clamped = false;
    for lam in eigenvalues.iter_mut() {
        if *lam <= zero_tol {
            clamped |= *lam != 0.0;
            *lam = 0.0;
        }
    }
    if clamped {
        let total: f64 = eigenvalues.iter().sum();
        for lam in eigenvalues.iter_mut() {
            *lam /= total;
        }
    }
    let rank = eigenvalues.iter().filter(|&&lam| lam > 0.0).count();
    let spectrum = Spectrum {
        eigenvalues,
        eigenvectors,
        rank,
        zero_tol,
    };

    let rebuilt = spectrum.apply(|lam| lam);
    let matrix = if clamped { rebuilt.clone() } else { herm };
    let matrix = ComplexMatrix(matrix);
    if matrix.max_abs_diff(&ComplexMatrix(rebuilt)) > tol.recon {
        return Err(Error::Decomposition);
    }

    let log = ComplexMatrix(spectrum.apply(|lam| if lam > 0.0 { lam.ln() } else { 0.0 }));
    let kernel =
        (rank < m).then(|| ComplexMatrix(spectrum.apply(|lam| if lam > 0.0 { 0.0 } else { 1.0 })));
    let entropy_nats = -spectrum
        .eigenvalues
        .iter()
        .filter(|&&lam| lam > 0.0)
        .map(|&lam| lam * lam.ln())
        .sum::<f64>();

    Ok(DensityMatrix {
        matrix,
        spectrum,
        log,
        kernel,
        entropy_nats: entropy_nats.max(0.0),
        tol: *tol,
    })
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.entropy_nats / LN_2
}

/// `Tr(AB)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    let (a, b) = (a.as_matrix(), b.as_matrix());
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let m = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

/// `V diag(ln lambda) V^dagger` with zero on the kernel (natural log).
pub fn log_on_support(rho: &DensityMatrix) -> &ComplexMatrix {
    &rho.log
}

/// `Tr[rho P_ker(sigma)]`, the weight of `rho` outside the support of `sigma`.
pub fn support_leakage(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    match &sigma.kernel {
        None => {
            if rho.dim() != sigma.dim() {
                return Err(Error::DimensionMismatch {
                    expected: sigma.dim(),
                    found: rho.dim(),
                });
            }
            Ok(0.0)
        }
        Some(ker) => Ok(trace_product(&rho.matrix, ker)?.re.max(0.0)),
    }
}

/// Quantum relative entropy in nats; `+inf` on a support violation.
pub fn relative_entropy_nats(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if support_leakage(rho, sigma)? > sigma.tol.support {
        return Ok(f64::INFINITY);
    }
    let cross = trace_product(&rho.matrix, &sigma.log)?.re;
    Ok((-rho.entropy_nats - cross).max(0.0))
}

/// Quantum relative entropy `Tr[rho (log rho - log sigma)]` in bits.
pub fn quantum_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(relative_entropy_nats(rho, sigma)? / LN_2)
}
