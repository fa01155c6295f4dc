use nalgebra::DMatrix;

use crate::error::{Issues, Result};
use crate::scalar::Real;

/// One bosonic mode with its retained Fock-space cutoff (occupations
/// `0..=fock_cutoff`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode<T> {
    pub frequency: T,
    pub fock_cutoff: usize,
}

impl<T> Mode<T> {
    pub fn new(frequency: T, fock_cutoff: usize) -> Self {
        Self {
            frequency,
            fock_cutoff,
        }
    }
}

/// Finite set of harmonic modes plus the site × mode coupling matrix `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec<T: Real> {
    modes: Vec<Mode<T>>,
    couplings: DMatrix<T>,
}

impl<T: Real> BathSpec<T> {
    /// `couplings` must be `n_sites × modes.len()`.
    pub fn new(modes: Vec<Mode<T>>, couplings: DMatrix<T>) -> Result<Self> {
        let mut issues = Issues::new();
        for (k, m) in modes.iter().enumerate() {
            issues.check(
                m.frequency > T::zero() && m.frequency.is_finite_val(),
                format!("bath.modes[{k}].frequency"),
                "frequency must be strictly positive and finite",
            );
            issues.check(
                m.fock_cutoff >= 1,
                format!("bath.modes[{k}].fock_cutoff"),
                "Fock cutoff must be at least 1",
            );
        }
        issues.check(
            couplings.ncols() == modes.len(),
            "bath.couplings",
            format!(
                "coupling matrix has {} columns for {} modes",
                couplings.ncols(),
                modes.len()
            ),
        );
        issues.check(
            couplings.iter().all(|g| g.is_finite_val()),
            "bath.couplings",
            "couplings must be finite",
        );
        issues.into_result()?;
        Ok(Self { modes, couplings })
    }

    /// No modes at all; the product basis reduces to the site basis.
    pub fn empty(n_sites: usize) -> Self {
        Self {
            modes: Vec::new(),
            couplings: DMatrix::zeros(n_sites, 0),
        }
    }

    /// Every site couples to every mode with the same strength.
    pub fn uniform(n_sites: usize, modes: Vec<Mode<T>>, g: T) -> Result<Self> {
        let k = modes.len();
        Self::new(modes, DMatrix::from_element(n_sites, k, g))
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn n_sites(&self) -> usize {
        self.couplings.nrows()
    }

    pub fn couplings(&self) -> &DMatrix<T> {
        &self.couplings
    }

    pub fn coupling(&self, site: usize, mode: usize) -> T {
        self.couplings[(site, mode)]
    }

    pub fn cutoffs(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.fock_cutoff).collect()
    }

    /// `Σ_k g_{i,k}² / ν_k` for one site.
    pub fn reorganization_energy(&self, site: usize) -> T {
        self.modes
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, m)| {
                let g = self.couplings[(site, k)];
                acc + g * g / m.frequency
            })
    }
}
