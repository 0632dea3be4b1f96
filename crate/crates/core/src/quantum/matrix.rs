use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use num_traits::{One, Zero};

use super::{StateVector, C64, MAX_UNITARY_QUBITS};
use crate::error::{bail, Result};

/// Square complex matrix, row-major.
///
/// Used for gate matrices, embedded gates and composed circuit unitaries.
/// Unitarity is checked where it matters ([`Matrix::unitary`],
/// [`Matrix::is_unitary`]) rather than on every construction, since QR
/// factors and differences of unitaries pass through the same type.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    entries: Vec<C64>,
}

/// A [`Matrix`] expected to satisfy `U U^† = I`.
pub type UnitaryMatrix = Matrix;

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![C64::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::one();
        }
        m
    }

    /// Build from `dim * dim` row-major entries without any check beyond the length.
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            bail!(InvalidArgument, "expected {} entries for a {dim}x{dim} matrix, got {}", dim * dim, entries.len());
        }
        Ok(Self { dim, entries })
    }

    /// Build from rows of equal length.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                bail!(InvalidArgument, "row of length {} in a {dim}-row matrix", row.len());
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { dim, entries })
    }

    /// Build a matrix that must be unitary within `1e-9` and have a power-of-two dimension.
    pub fn unitary(dim: usize, entries: Vec<C64>) -> Result<Self> {
        let m = Self::from_entries(dim, entries)?;
        if !dim.is_power_of_two() || dim < 2 {
            bail!(InvalidArgument, "unitary dimension {dim} is not a power of two >= 2");
        }
        if dim.trailing_zeros() as usize > MAX_UNITARY_QUBITS {
            bail!(InvalidArgument, "unitary on {} qubits exceeds the cap of {MAX_UNITARY_QUBITS}", dim.trailing_zeros());
        }
        if !m.is_unitary(super::TOL) {
            bail!(InvalidArgument, "matrix is not unitary within 1e-9");
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits for a power-of-two dimension.
    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.entries[r * self.dim..(r + 1) * self.dim]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    /// Plain matrix product `self * rhs`. Panics on dimension mismatch; see [`compose`].
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == C64::zero() {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.entries[r * n..(r + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|e| e * s).collect() }
    }

    /// Matrix-vector product on raw amplitudes.
    pub fn apply_to(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "matrix-vector dimension mismatch");
        (0..self.dim)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `U |psi>`, keeping the statevector type.
    pub fn apply_state(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim {
            bail!(InvalidArgument, "state of dimension {} against a {}x{} matrix", state.dim(), self.dim, self.dim);
        }
        Ok(StateVector::from_raw(state.num_qubits(), self.apply_to(state.amplitudes())))
    }

    /// Largest entrywise modulus of `U U^† - I`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let dot: C64 = self.row(r).iter().zip(self.row(c)).map(|(a, b)| a * b.conj()).sum();
                let expected = if r == c { C64::one() } else { C64::zero() };
                worst = worst.max((dot - expected).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.dim + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for e in self.row(r) {
                write!(f, "{:+.6}{:+.6}i ", e.re, e.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Matrix product `u * v`.
pub fn compose(u: &Matrix, v: &Matrix) -> Result<Matrix> {
    if u.dim != v.dim {
        bail!(InvalidArgument, "cannot compose {}x{} with {}x{}", u.dim, u.dim, v.dim, v.dim);
    }
    Ok(u.mul(v))
}

/// Squared Frobenius norm `||u - v||^2`.
pub fn frobenius_distance(u: &Matrix, v: &Matrix) -> Result<f64> {
    if u.dim != v.dim {
        bail!(InvalidArgument, "frobenius distance between {}x{} and {}x{}", u.dim, u.dim, v.dim, v.dim);
    }
    Ok(u.entries.iter().zip(&v.entries).map(|(a, b)| (a - b).norm_sqr()).sum())
}
