//! Sparse complex operators.
//!
//! Hamiltonians on the site ⊗ Fock product space are extremely sparse (one
//! diagonal entry plus a handful of hopping and ladder entries per row), so
//! they are stored in compressed-row form. Dense copies are produced on demand
//! for the methods that need them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{abs_c, tolerance, Complex, Real};

/// Relative max-norm tolerance for the Hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real> {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex<T>>,
    hermitian: bool,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indptr: vec![0; dim + 1],
            indices: Vec::new(),
            values: Vec::new(),
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); dim])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.iter()
                .enumerate()
                .map(|(i, &d)| (i, i, Complex::new(d, T::zero()))),
        )
        .expect("diagonal indices in range")
        .with_hermitian_flag(true)
    }

    /// Builds from `(row, col, value)` entries. Duplicates are summed and
    /// exact zeros dropped. The result is not flagged Hermitian.
    pub fn from_triplets<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex<T>)>,
    {
        let mut rows: Vec<Vec<(usize, Complex<T>)>> = vec![Vec::new(); dim];
        for (r, col, v) in entries {
            if r >= dim || col >= dim {
                return Err(Error::invalid(
                    "operator",
                    format!("entry ({r}, {col}) outside dimension {dim}"),
                ));
            }
            rows[r].push((col, v));
        }
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(col, _)| col);
            let mut iter = row.into_iter().peekable();
            while let Some((col, mut v)) = iter.next() {
                while let Some(&(next, w)) = iter.peek() {
                    if next != col {
                        break;
                    }
                    v += w;
                    iter.next();
                }
                if v != Complex::new(T::zero(), T::zero()) {
                    indices.push(col);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            dim,
            indptr,
            indices,
            values,
            hermitian: false,
        })
    }

    pub fn from_dense(m: &DMatrix<Complex<T>>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid("operator", "matrix is not square"));
        }
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j, m[(i, j)]))),
        )
    }

    /// Sets the Hermitian flag without checking. Builders use this for
    /// operators that are symmetric by construction.
    pub(crate) fn with_hermitian_flag(mut self, flag: bool) -> Self {
        self.hermitian = flag;
        self
    }

    /// Sets the Hermitian flag after verifying the tolerance.
    pub fn into_hermitian(mut self) -> Result<Self> {
        self.check_hermitian()?;
        self.hermitian = true;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        let span = self.indptr[row]..self.indptr[row + 1];
        match self.indices[span.clone()].binary_search(&col) {
            Ok(k) => self.values[span.start + k],
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    /// Iterates stored entries as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, &v| RealMax::max(m, abs_c(v)))
    }

    /// `max |H_ij − conj(H_ji)|`.
    pub fn hermiticity_defect(&self) -> T {
        self.iter().fold(T::zero(), |m, (r, col, v)| {
            RealMax::max(m, abs_c(v - self.get(col, r).conj()))
        })
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let scale = self.max_abs();
        let defect = self.hermiticity_defect();
        if defect <= tolerance::<T>(HERMITIAN_TOL) * scale {
            Ok(())
        } else {
            Err(Error::invalid(
                "operator",
                format!("not Hermitian: defect {defect:e} relative to max entry {scale:e}"),
            ))
        }
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    pub fn mul_vec(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let mut y = DVector::zeros(self.dim);
        self.apply(x.as_slice(), y.as_mut_slice());
        y
    }

    /// `⟨x|H|x⟩`.
    pub fn expectation(&self, x: &DVector<Complex<T>>) -> Complex<T> {
        let hx = self.mul_vec(x);
        x.iter()
            .zip(hx.iter())
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, col, v) in self.iter() {
            m[(r, col)] = v;
        }
        m
    }

    /// Entrywise sum. The result is flagged Hermitian when both inputs are.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::invalid(
                "operator",
                format!("dimension mismatch {} vs {}", self.dim, other.dim),
            ));
        }
        let sum = Self::from_triplets(self.dim, self.iter().chain(other.iter()))?;
        Ok(sum.with_hermitian_flag(self.hermitian && other.hermitian))
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    /// Upper bound on the spectral radius (max absolute row sum).
    pub fn norm_bound(&self) -> T {
        (0..self.dim).fold(T::zero(), |m, r| {
            let row = (self.indptr[r]..self.indptr[r + 1])
                .fold(T::zero(), |s, k| s + abs_c(self.values[k]));
            RealMax::max(m, row)
        })
    }
}

/// Disambiguates `max` between `RealField` and `Ord`-like helpers.
pub(crate) trait RealMax {
    fn max(a: Self, b: Self) -> Self;
    fn min(a: Self, b: Self) -> Self;
}

impl<T: Real> RealMax for T {
    #[inline]
    fn max(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
    #[inline]
    fn min(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}
