//! Dense Hermitian linear algebra.
//!
//! Every matrix function in the crate goes through [`SpectralDecomposition`]:
//! eigenvalues at or below the clamp threshold `τ = dim · 1e-12 · max|λ|` are
//! treated as exact zeros, so supports, ranges and fractional powers all agree
//! on which eigenvectors count.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative clamp factor for eigenvalues; multiplied by `dim · max|λ|`.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Hermiticity tolerance, relative to `max(1, max|entry|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default cap on `dim^n` for tensor powers.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "QHT_DIM_CAP";

/// Tensor dimension cap in effect: `QHT_DIM_CAP` if set and valid, else 4096.
pub fn dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_DIM_CAP)
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Checks squareness and Hermiticity, then stores `(m + m†)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let asym = max_asymmetry(&m);
        let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::NonHermitianInput(asym));
        }
        Ok(Self::hermitized(m))
    }

    /// Symmetrizes without checking; use for products that are Hermitian in
    /// exact arithmetic.
    pub fn hermitized(m: CMatrix) -> Self {
        assert!(m.is_square(), "hermitized: matrix must be square");
        let adj = m.adjoint();
        Self((m + adj).scale(0.5))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Real part of the trace (the imaginary part vanishes).
    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    /// `Re Tr[self · other]`, computed without forming the product.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        trace_of_product(&self.0, &other.0).re
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.0[(i, j)] == C64::new(0.0, 0.0)))
    }

    pub fn eigh(&self) -> SpectralDecomposition {
        eigh(self)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix(-&self.0)
    }
}

/// Product of two Hermitian matrices; generally not Hermitian.
impl Mul for &HermitianMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &HermitianMatrix) -> CMatrix {
        &self.0 * &rhs.0
    }
}

fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `Tr[a · b]` in O(n²).
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigenvalues (descending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Clamp threshold `τ = dim · 1e-12 · max|λ|`.
    pub fn threshold(&self) -> f64 {
        let max_abs = self
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, &l| acc.max(l.abs()));
        self.dim() as f64 * EIGEN_CLAMP * max_abs
    }

    /// Eigenvalues with `|λ| ≤ τ` set to exactly zero.
    pub fn clamped_eigenvalues(&self) -> Vec<f64> {
        let tau = self.threshold();
        self.eigenvalues
            .iter()
            .map(|&l| if l.abs() <= tau { 0.0 } else { l })
            .collect()
    }

    /// Number of eigenvalues strictly above `τ`.
    pub fn rank_above_threshold(&self) -> usize {
        let tau = self.threshold();
        self.eigenvalues.iter().filter(|&&l| l > tau).count()
    }

    /// `V · diag(f(λ)) · V†` for a real function of the eigenvalues.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> HermitianMatrix {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.from_weights(&weights)
    }

    pub(crate) fn from_weights(&self, weights: &[f64]) -> HermitianMatrix {
        let v = &self.eigenvectors;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                scaled.column_mut(k).fill(C64::new(0.0, 0.0));
            } else {
                scaled.column_mut(k).scale_mut(w);
            }
        }
        let mut out = CMatrix::zeros(n, n);
        out.gemm(C64::new(1.0, 0.0), &scaled, &v.adjoint(), C64::new(0.0, 0.0));
        HermitianMatrix::hermitized(out)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.from_weights(&self.eigenvalues)
    }

    /// Projector onto eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector_where<F: Fn(f64) -> bool>(&self, keep: F) -> Projector {
        Projector(self.map(|l| if keep(l) { 1.0 } else { 0.0 }))
    }

    pub(crate) fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Spectral decomposition of `m`, eigenvalues sorted descending.
///
/// Diagonal input takes an exact shortcut; everything else goes through the
/// implicit-QR Hermitian solver.
pub fn eigh(m: &HermitianMatrix) -> SpectralDecomposition {
    let n = m.dim();
    let (values, vectors) = if m.is_diagonal() {
        let values: Vec<f64> = (0..n).map(|i| m.0[(i, i)].re).collect();
        (values, CMatrix::identity(n, n))
    } else {
        let eig = SymmetricEigen::new(m.0.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Eigenvalues only, descending.
pub fn eigvalsh(m: &HermitianMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = if m.is_diagonal() {
        (0..m.dim()).map(|i| m.0[(i, i)].re).collect()
    } else {
        m.0.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// An orthogonal projector.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector(HermitianMatrix);

impl Projector {
    /// Accepts `m` if it is idempotent within 1e-10 per entry.
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        let sq = &m * &m;
        let dev = (sq - m.as_matrix())
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()));
        if dev > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not idempotent (deviation {dev:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn zero(dim: usize) -> Self {
        Self(HermitianMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(HermitianMatrix::identity(dim))
    }

    /// Projector onto the span of the given (not necessarily orthonormal)
    /// columns.
    pub fn onto_columns(cols: &CMatrix) -> Self {
        let qr = cols.clone().qr();
        let q = qr.q();
        let p = &q * q.adjoint();
        Self(HermitianMatrix::hermitized(p))
    }

    pub fn complement(&self) -> Self {
        Self(&HermitianMatrix::identity(self.dim()) - &self.0)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn rank(&self) -> usize {
        self.0.trace().round() as usize
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }
}

fn require_psd(d: &SpectralDecomposition) -> Result<()> {
    let min = d.min_eigenvalue();
    if min < -d.threshold() {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(())
}

/// `x^t` for `x ≥ 0` with `0^t = 0` for every `t`, including `t = 0`.
///
/// This is the continuous-in-`t` convention: it makes `A^0` the support
/// projection and `Q_s` continuous at both endpoints.
#[inline]
pub fn pow_support(x: f64, t: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if t == 0.0 {
        1.0
    } else {
        x.powf(t)
    }
}

/// `m^t` for PSD `m` and `t ∈ [0, 1]`; `m^0` is the support projection.
pub fn matrix_power(m: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    let d = eigh(m);
    matrix_power_from(&d, t)
}

pub fn matrix_power_from(d: &SpectralDecomposition, t: f64) -> Result<HermitianMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "matrix power exponent {t} outside [0, 1]"
        )));
    }
    require_psd(d)?;
    let weights: Vec<f64> = d
        .clamped_eigenvalues()
        .into_iter()
        .map(|l| pow_support(l, t))
        .collect();
    Ok(d.from_weights(&weights))
}

/// Natural logarithm of a PSD matrix restricted to its support (zero on the
/// kernel).
pub fn support_log(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d = eigh(m);
    require_psd(&d)?;
    let weights: Vec<f64> = d
        .clamped_eigenvalues()
        .into_iter()
        .map(|l| if l > 0.0 { l.ln() } else { 0.0 })
        .collect();
    Ok(d.from_weights(&weights))
}

/// `m_+ = (|m| + m)/2`.
pub fn positive_part(m: &HermitianMatrix) -> HermitianMatrix {
    eigh(m).map(|l| l.max(0.0))
}

/// Jordan decomposition `(m_+, m_-)` from a single spectral decomposition.
pub fn jordan_decomposition(m: &HermitianMatrix) -> (HermitianMatrix, HermitianMatrix) {
    let d = eigh(m);
    (d.map(|l| l.max(0.0)), d.map(|l| (-l).max(0.0)))
}

/// Projector onto eigenvectors with eigenvalue `> τ`.
pub fn range_projector(m: &HermitianMatrix) -> Projector {
    let d = eigh(m);
    let tau = d.threshold();
    d.projector_where(|l| l > tau)
}

/// `Tr|m|`.
pub fn trace_norm(m: &HermitianMatrix) -> f64 {
    eigvalsh(m).iter().map(|l| l.abs()).sum()
}

/// Support projection of a PSD matrix.
pub fn support_projection(m: &HermitianMatrix) -> Result<Projector> {
    let d = eigh(m);
    require_psd(&d)?;
    let tau = d.threshold();
    Ok(d.projector_where(|l| l > tau))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `m^{⊗n}`, refusing results larger than [`dim_cap`].
pub fn tensor_power(m: &HermitianMatrix, n: usize) -> Result<HermitianMatrix> {
    tensor_power_capped(m, n, dim_cap())
}

pub fn tensor_power_capped(m: &HermitianMatrix, n: usize, cap: usize) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n ≥ 1".into()));
    }
    let dim = checked_tensor_dim(m.dim(), n, cap)?;
    let mut out = m.as_matrix().clone();
    for _ in 1..n {
        out = out.kronecker(m.as_matrix());
    }
    debug_assert_eq!(out.nrows(), dim);
    Ok(HermitianMatrix::hermitized(out))
}

/// `dim^n`, or `DimensionCapExceeded` when it overflows or exceeds `cap`.
pub fn checked_tensor_dim(dim: usize, n: usize, cap: usize) -> Result<usize> {
    let exp = u32::try_from(n).unwrap_or(u32::MAX);
    match dim.checked_pow(exp) {
        Some(d) if d <= cap => Ok(d),
        Some(d) => Err(Error::DimensionCapExceeded { dim: d, cap }),
        None => Err(Error::DimensionCapExceeded {
            dim: usize::MAX,
            cap,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Traces out `which` from a matrix on `A ⊗ B` with `dims = (dA, dB)`.
pub fn partial_trace(m: &CMatrix, which: Subsystem, dims: (usize, usize)) -> Result<CMatrix> {
    let (da, db) = dims;
    if m.nrows() != da * db || m.ncols() != da * db {
        return Err(Error::DimensionMismatch(m.nrows(), da * db));
    }
    let zero = C64::new(0.0, 0.0);
    Ok(match which {
        Subsystem::B => CMatrix::from_fn(da, da, |i, j| {
            (0..db).fold(zero, |acc, k| acc + m[(i * db + k, j * db + k)])
        }),
        Subsystem::A => CMatrix::from_fn(db, db, |i, j| {
            (0..da).fold(zero, |acc, k| acc + m[(k * db + i, k * db + j)])
        }),
    })
}
