//! Dense complex matrices and multi-qubit index manipulation.
//!
//! Qubits are numbered from 1 in every public signature. Qubit 1 is the
//! leftmost tensor factor, i.e. the most significant bit of a basis index.
//! Matrices are vectorized row by row, so that `vec(A X B) = (A ⊗ Bᵀ) vec(X)`
//! and in particular `vec(U ρ U†) = (U ⊗ conj U) vec(ρ)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Numerical tolerances shared by the whole crate.
pub mod tol {
    /// Elementwise Hermiticity of density matrices.
    pub const HERMITIAN: f64 = 1e-12;
    /// Unit trace of density matrices.
    pub const TRACE: f64 = 1e-12;
    /// Smallest eigenvalue accepted for a positive-semidefinite matrix.
    pub const PSD_SLACK: f64 = -1e-10;
    /// Hermiticity required before an eigendecomposition.
    pub const EIGEN_HERMITIAN: f64 = 1e-10;
    /// Agreement between an implementation and an independent oracle.
    pub const ORACLE: f64 = 1e-9;
}

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{iφ}`
#[inline]
pub fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from entries listed row by row.
    ///
    /// Panics if `entries.len() != rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        Self(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Self(DMatrix::from_fn(N, N, |i, j| c(rows[i][j], 0.0)))
    }

    pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        Self(DMatrix::from_fn(N, N, |i, j| rows[i][j]))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    /// Column vector.
    pub fn column(entries: &[Complex64]) -> Self {
        Self::from_row_slice(entries.len(), 1, entries)
    }

    /// `|v⟩⟨v|` for a column vector `v`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Entries in row-major order.
    pub fn entries_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Rows of `[re, im]` pairs, the layout used for structured output.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| [self.0[(i, j)].re, self.0[(i, j)].im]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn map(&self, f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self(self.0.map(f))
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise modulus of `self - self†`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius inner product `Tr[self† other]`.
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.clone().determinant()
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(Self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of a non-empty list, leftmost factor first.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, m| kron(&acc, m))
}

/// Stacks the rows of `m` top to bottom into a column vector.
pub fn vec_row_major(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::column(&m.entries_row_major())
}

/// Inverse of [`vec_row_major`] for square matrices.
pub fn unvec_row_major(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let len = v.rows() * v.cols();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len || (v.cols() != 1 && v.rows() != 1) {
        return Err(Error::NotSquareLength(len));
    }
    let entries: Vec<Complex64> = v.0.iter().copied().collect();
    Ok(ComplexMatrix::from_row_slice(n, n, &entries))
}

/// Number of qubits of a `2ⁿ × 2ⁿ` matrix.
pub fn qubit_count(m: &ComplexMatrix) -> Result<usize> {
    let d = m.rows();
    if !m.is_square() || !d.is_power_of_two() {
        return Err(Error::DimensionMismatch {
            expected: "square 2^n x 2^n matrix".into(),
            found: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    Ok(d.trailing_zeros() as usize)
}

/// Validates a set of 1-based qubit indices that must be a proper, nonempty
/// subset of `1..=n`. Returns the bit masks of the chosen qubits.
fn subset_mask(subset: &[usize], n: usize) -> Result<usize> {
    let err = |reason| Error::InvalidQubitSet {
        subset: subset.to_vec(),
        qubits: n,
        reason,
    };
    if subset.is_empty() {
        return Err(err("subset is empty"));
    }
    let mut mask = 0usize;
    for &q in subset {
        if q == 0 || q > n {
            return Err(err("qubit index out of range"));
        }
        let bit = 1 << (n - q);
        if mask & bit != 0 {
            return Err(err("duplicate qubit index"));
        }
        mask |= bit;
    }
    if mask == (1 << n) - 1 {
        return Err(err("subset covers every qubit"));
    }
    Ok(mask)
}

/// Transposes the indices of the qubits in `subset` only.
pub fn partial_transpose(rho: &ComplexMatrix, subset: &[usize]) -> Result<ComplexMatrix> {
    let n = qubit_count(rho)?;
    let mask = subset_mask(subset, n)?;
    let d = rho.rows();
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        let swap = (i ^ j) & mask;
        rho[(i ^ swap, j ^ swap)]
    }))
}

/// Partial trace over the qubits in `subset`; remaining qubits keep their order.
pub fn trace_out(rho: &ComplexMatrix, subset: &[usize]) -> Result<ComplexMatrix> {
    let n = qubit_count(rho)?;
    let mask = subset_mask(subset, n)?;
    let kept: Vec<usize> = (0..n).rev().filter(|b| mask & (1 << b) == 0).collect();
    let traced: Vec<usize> = (0..n).rev().filter(|b| mask & (1 << b) != 0).collect();
    let spread = |index: usize, bits: &[usize]| -> usize {
        bits.iter()
            .enumerate()
            .map(|(k, &b)| ((index >> (bits.len() - 1 - k)) & 1) << b)
            .sum()
    };
    let dk = 1 << kept.len();
    let dt = 1 << traced.len();
    Ok(ComplexMatrix::from_fn(dk, dk, |i, j| {
        let (bi, bj) = (spread(i, &kept), spread(j, &kept));
        (0..dt)
            .map(|t| {
                let bt = spread(t, &traced);
                rho[(bi | bt, bj | bt)]
            })
            .sum()
    }))
}

/// `K ρ K†` with a single-qubit operator `K` acting on `qubit` (1-based) of an
/// `n`-qubit matrix, without forming the embedded `2ⁿ × 2ⁿ` operator.
pub fn local_sandwich(rho: &ComplexMatrix, k: &ComplexMatrix, qubit: usize) -> ComplexMatrix {
    let n = qubit_count(rho).expect("power-of-two square matrix");
    assert!(qubit >= 1 && qubit <= n, "qubit index out of range");
    assert!(k.rows() == 2 && k.cols() == 2, "single-qubit operator expected");
    let bit = 1usize << (n - qubit);
    let d = rho.rows();
    let bit_of = |i: usize| usize::from(i & bit != 0);
    let left = ComplexMatrix::from_fn(d, d, |i, j| {
        let r = bit_of(i);
        k[(r, 0)] * rho[(i & !bit, j)] + k[(r, 1)] * rho[(i | bit, j)]
    });
    ComplexMatrix::from_fn(d, d, |i, j| {
        let s = bit_of(j);
        left[(i, j & !bit)] * k[(s, 0)].conj() + left[(i, j | bit)] * k[(s, 1)].conj()
    })
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, k)]).collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }
}

pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    let eig = faer_eigen(m)?;
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.S()[a].re.total_cmp(&eig.S()[b].re));
    let values = order.iter().map(|&k| eig.S()[k].re).collect();
    let u = eig.U();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok(Eigensystem { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let eig = faer_eigen(m)?;
    let mut values: Vec<f64> = (0..m.rows()).map(|k| eig.S()[k].re).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn faer_eigen(m: &ComplexMatrix) -> Result<faer::linalg::solvers::SelfAdjointEigen<Complex64>> {
    let residual = m.hermitian_residual();
    if residual > tol::EIGEN_HERMITIAN {
        return Err(Error::NotHermitian { residual });
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let n = m.rows();
    let sym = faer::Mat::<Complex64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    sym.self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::NotHermitian { residual })
}

/// Hermitian, unit-trace, positive-semidefinite matrix on `n` qubits.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    qubits: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let qubits = qubit_count(&matrix)?;
        if !matrix.is_finite() {
            return Err(Error::NotDensityMatrix("non-finite entries".into()));
        }
        let herm = matrix.hermitian_residual();
        if herm > tol::HERMITIAN {
            return Err(Error::NotDensityMatrix(format!(
                "Hermiticity residual {herm:e}"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > tol::TRACE {
            return Err(Error::NotDensityMatrix(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(&matrix)?[0];
        if min < tol::PSD_SLACK {
            return Err(Error::NotDensityMatrix(format!("eigenvalue {min:e}")));
        }
        Ok(Self { matrix, qubits })
    }

    /// Pure state `|ψ⟩⟨ψ|`; `psi` is normalized first.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotDensityMatrix("zero state vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        let matrix = ComplexMatrix::outer(&v);
        let qubits = qubit_count(&matrix)?;
        Ok(Self { matrix, qubits })
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let d = 1 << qubits;
        Self {
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            qubits,
        }
    }

    /// Wraps a matrix produced by a trace-preserving, completely positive
    /// operation on a valid state. Only checked in debug builds.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let qubits = qubit_count(&matrix).expect("power-of-two square matrix");
        debug_assert!(matrix.hermitian_residual() < 1e-9);
        debug_assert!((matrix.trace() - ONE).norm() < 1e-9);
        Self { matrix, qubits }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.hs_inner(&self.matrix).re
    }

    /// `Tr[self · other]` (both Hermitian, so the result is real).
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        // Tr[A B] = Tr[A† B] for Hermitian A
        self.matrix.hs_inner(&other.matrix).re
    }

    pub fn expectation(&self, observable: &ComplexMatrix) -> Complex64 {
        (&self.matrix * observable).trace()
    }

    pub fn partial_transpose(&self, subset: &[usize]) -> Result<ComplexMatrix> {
        partial_transpose(&self.matrix, subset)
    }

    pub fn trace_out(&self, subset: &[usize]) -> Result<DensityMatrix> {
        Ok(Self::from_trusted(trace_out(&self.matrix, subset)?))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            qubits: self.qubits + other.qubits,
        }
    }

    /// `U ρ U†`
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        if u.rows() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", self.dim()),
                found: format!("{}x{}", u.rows(), u.cols()),
            });
        }
        let m = &(u * &self.matrix) * &u.adjoint();
        Ok(Self::from_trusted(m))
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({} qubits) {:?}", self.qubits, self.matrix)
    }
}
