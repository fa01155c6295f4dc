use std::collections::HashSet;

use crate::error::{Issues, Result};
use crate::scalar::Real;

/// Coherent hopping amplitude between two distinct sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling<T> {
    pub i: usize,
    pub j: usize,
    pub amplitude: T,
}

impl<T> Coupling<T> {
    pub fn new(i: usize, j: usize, amplitude: T) -> Self {
        Self { i, j, amplitude }
    }
}

/// Absorbing trap attached to one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sink<T> {
    pub site: usize,
    pub rate: T,
}

/// The particle subsystem: on-site energies, hopping amplitudes and an
/// optional trap. Energies and amplitudes are angular frequencies (ħ = 1).
///
/// Each unordered pair appears at most once; the amplitude is placed
/// symmetrically when the Hamiltonian is built.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteNetwork<T: Real> {
    energies: Vec<T>,
    couplings: Vec<Coupling<T>>,
    sink: Option<Sink<T>>,
    coordinates: Option<Vec<T>>,
}

impl<T: Real> SiteNetwork<T> {
    pub fn new(
        energies: Vec<T>,
        couplings: Vec<Coupling<T>>,
        sink: Option<Sink<T>>,
    ) -> Result<Self> {
        let net = Self {
            energies,
            couplings,
            sink,
            coordinates: None,
        };
        net.validate()?;
        Ok(net)
    }

    /// Nearest-neighbour open chain with uniform hopping `t`, sites placed at
    /// integer coordinates `0..N`.
    pub fn chain(energies: Vec<T>, t: T) -> Result<Self> {
        let n = energies.len();
        let couplings = (1..n).map(|i| Coupling::new(i - 1, i, t)).collect();
        let coords = (0..n).map(T::from_usize_lossy).collect();
        Self::new(energies, couplings, None)?.with_coordinates(coords)
    }

    pub fn with_sink(mut self, site: usize, rate: T) -> Result<Self> {
        self.sink = Some(Sink { site, rate });
        self.validate()?;
        Ok(self)
    }

    pub fn without_sink(mut self) -> Self {
        self.sink = None;
        self
    }

    /// Attaches 1-D positions used for displacement observables.
    pub fn with_coordinates(mut self, coords: Vec<T>) -> Result<Self> {
        self.coordinates = Some(coords);
        self.validate()?;
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn couplings(&self) -> &[Coupling<T>] {
        &self.couplings
    }

    pub fn sink(&self) -> Option<Sink<T>> {
        self.sink
    }

    pub fn coordinates(&self) -> Option<&[T]> {
        self.coordinates.as_deref()
    }

    /// Largest hopping magnitude, the natural unit for times and rates.
    pub fn max_coupling(&self) -> T {
        self.couplings.iter().fold(T::zero(), |m, c| {
            let a = c.amplitude.abs();
            if a > m {
                a
            } else {
                m
            }
        })
    }

    fn validate(&self) -> Result<()> {
        let n = self.energies.len();
        let mut issues = Issues::new();
        issues.check(n > 0, "network.energies", "at least one site required");
        for (k, e) in self.energies.iter().enumerate() {
            issues.check(
                e.is_finite_val(),
                format!("network.energies[{k}]"),
                "energy must be finite",
            );
        }
        let mut seen = HashSet::new();
        for (k, c) in self.couplings.iter().enumerate() {
            let field = format!("network.couplings[{k}]");
            if c.i >= n || c.j >= n {
                issues.push(
                    &field,
                    format!("site index ({}, {}) out of range for {n} sites", c.i, c.j),
                );
                continue;
            }
            if c.i == c.j {
                issues.push(&field, format!("self-coupling on site {}", c.i));
                continue;
            }
            issues.check(c.amplitude.is_finite_val(), &field, "amplitude must be finite");
            let pair = (c.i.min(c.j), c.i.max(c.j));
            if !seen.insert(pair) {
                issues.push(
                    &field,
                    format!("duplicate coupling for pair ({}, {})", pair.0, pair.1),
                );
            }
        }
        if let Some(s) = self.sink {
            issues.check(
                s.site < n,
                "network.sink.site",
                format!("sink site {} out of range for {n} sites", s.site),
            );
            issues.check(
                s.rate >= T::zero() && s.rate.is_finite_val(),
                "network.sink.rate",
                "sink rate must be nonnegative and finite",
            );
        }
        if let Some(coords) = &self.coordinates {
            issues.check(
                coords.len() == n,
                "network.coordinates",
                format!("expected {n} coordinates, got {}", coords.len()),
            );
        }
        issues.into_result()
    }
}
