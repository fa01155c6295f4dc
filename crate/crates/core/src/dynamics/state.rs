use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::ProductBasis;
use crate::operator::RealMax;
use crate::scalar::{abs_c, tolerance, Complex, Real};

/// Normalization tolerance for pure states.
pub const NORM_TOL: f64 = 1e-9;
/// Trace tolerance for density matrices at construction.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue accepted at construction.
pub const EIGEN_FLOOR: f64 = -1e-9;

/// Amplitudes over a site ⊗ bath product basis. `bath_dim` is the size of
/// the bath factor (1 for a bare site vector).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: DVector<Complex<T>>,
    bath_dim: usize,
}

impl<T: Real> PureState<T> {
    pub fn new(amplitudes: DVector<Complex<T>>, bath_dim: usize) -> Result<Self> {
        if bath_dim == 0 || !amplitudes.len().is_multiple_of(bath_dim) || amplitudes.is_empty() {
            return Err(Error::invalid(
                "state.amplitudes",
                format!(
                    "length {} is not a positive multiple of bath dimension {bath_dim}",
                    amplitudes.len()
                ),
            ));
        }
        let norm = amplitudes.norm();
        if (norm - T::one()).abs() > tolerance::<T>(NORM_TOL) {
            return Err(Error::invalid(
                "state.amplitudes",
                format!("state norm {norm} differs from 1"),
            ));
        }
        Ok(Self {
            amplitudes,
            bath_dim,
        })
    }

    /// Normalizes first; fails only on a zero vector or bad shape.
    pub fn normalized(amplitudes: DVector<Complex<T>>, bath_dim: usize) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == T::zero() {
            return Err(Error::invalid("state.amplitudes", "zero vector"));
        }
        Self::new(amplitudes.unscale(norm), bath_dim)
    }

    /// Site vector, no bath.
    pub fn on_sites(amplitudes: DVector<Complex<T>>) -> Result<Self> {
        Self::new(amplitudes, 1)
    }

    /// Particle on `site`, bath in its vacuum.
    pub fn localized(basis: &ProductBasis, site: usize) -> Result<Self> {
        let idx = basis.encode(site, &vec![0; basis.n_modes()])?;
        let mut v = DVector::zeros(basis.total_dim());
        v[idx] = Complex::new(T::one(), T::zero());
        Self::new(v, basis.bath_dim())
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn bath_dim(&self) -> usize {
        self.bath_dim
    }

    pub fn n_sites(&self) -> usize {
        self.amplitudes.len() / self.bath_dim
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    pub(crate) fn from_raw(amplitudes: DVector<Complex<T>>, bath_dim: usize) -> Self {
        Self {
            amplitudes,
            bath_dim,
        }
    }

    /// Site populations with the bath traced out.
    pub fn populations(&self) -> Vec<T> {
        self.amplitudes
            .as_slice()
            .chunks(self.bath_dim)
            .map(|block| block.iter().fold(T::zero(), |s, a| s + a.norm_sqr()))
            .collect()
    }

    /// Reduced site density matrix `ρ_ij = Σ_b ψ(i,b) ψ*(j,b)`.
    pub fn reduced_density(&self) -> DMatrix<Complex<T>> {
        let n = self.n_sites();
        let b = self.bath_dim;
        let a = self.amplitudes.as_slice();
        DMatrix::from_fn(n, n, |i, j| {
            (0..b).fold(Complex::new(T::zero(), T::zero()), |s, k| {
                s + a[i * b + k] * a[j * b + k].conj()
            })
        })
    }
}

/// Density matrix over the site space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: DMatrix<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<Complex<T>>) -> Result<Self> {
        Self::with_trace(matrix, T::one())
    }

    /// As [`new`](Self::new) but against a declared trace (below one once a
    /// sink has absorbed weight).
    pub fn with_trace(matrix: DMatrix<Complex<T>>, declared: T) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.is_empty() {
            return Err(Error::invalid("state.density", "matrix must be square and nonempty"));
        }
        let rho = Self { matrix };
        let scale = rho.max_abs();
        if rho.hermiticity_defect() > tolerance::<T>(1e-12) * scale {
            return Err(Error::invalid("state.density", "matrix is not Hermitian"));
        }
        let tr = rho.trace();
        if (tr - declared).abs() > tolerance::<T>(TRACE_TOL) {
            return Err(Error::invalid(
                "state.density",
                format!("trace {tr} differs from declared {declared}"),
            ));
        }
        let lo = rho.min_eigenvalue();
        if lo < T::lit(EIGEN_FLOOR) {
            return Err(Error::invalid(
                "state.density",
                format!("negative eigenvalue {lo:e}"),
            ));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        Self {
            matrix: psi.reduced_density(),
        }
    }

    pub fn localized(n_sites: usize, site: usize) -> Result<Self> {
        if site >= n_sites {
            return Err(Error::invalid(
                "state.site",
                format!("site {site} out of range for {n_sites} sites"),
            ));
        }
        let mut m = DMatrix::zeros(n_sites, n_sites);
        m[(site, site)] = Complex::new(T::one(), T::zero());
        Ok(Self { matrix: m })
    }

    pub fn maximally_mixed(n_sites: usize) -> Self {
        let p = T::one() / T::from_usize_lossy(n_sites);
        Self {
            matrix: DMatrix::from_diagonal_element(n_sites, n_sites, Complex::new(p, T::zero())),
        }
    }

    pub(crate) fn from_raw(matrix: DMatrix<Complex<T>>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.matrix
    }

    pub fn n_sites(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> T {
        self.matrix.diagonal().iter().fold(T::zero(), |s, z| s + z.re)
    }

    pub fn populations(&self) -> Vec<T> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn max_abs(&self) -> T {
        self.matrix.iter().fold(T::zero(), |m, &z| RealMax::max(m, abs_c(z)))
    }

    pub fn hermiticity_defect(&self) -> T {
        let n = self.n_sites();
        let mut d = T::zero();
        for i in 0..n {
            for j in i..n {
                d = RealMax::max(d, abs_c(self.matrix[(i, j)] - self.matrix[(j, i)].conj()));
            }
        }
        d
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> T {
        let h = (&self.matrix + self.matrix.adjoint()).scale(T::lit(0.5));
        SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .fold(T::infinity(), |m, &x| RealMax::min(m, x))
    }
}

/// Either representation handled by the observables.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState<T: Real> {
    Pure(PureState<T>),
    Density(DensityMatrix<T>),
}

impl<T: Real> From<PureState<T>> for QuantumState<T> {
    fn from(s: PureState<T>) -> Self {
        QuantumState::Pure(s)
    }
}

impl<T: Real> From<DensityMatrix<T>> for QuantumState<T> {
    fn from(s: DensityMatrix<T>) -> Self {
        QuantumState::Density(s)
    }
}

/// `Σ_{i≠j} |ρ_ij|`.
pub(crate) fn l1_offdiag<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let n = m.nrows();
    let mut s = T::zero();
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += abs_c(m[(i, j)]);
            }
        }
    }
    s
}
