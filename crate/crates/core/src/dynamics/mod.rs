//! Closed (unitary) evolution on the joint site ⊗ bath space and open
//! (dephasing, incoherent hopping, sink) evolution on the site space.

mod open;
mod propagator;
mod state;
mod unitary;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Issues, Result};
use crate::scalar::{Complex, Real};

pub use open::{evolve_open, ChannelSpec, Hop, Lindbladian};
pub use propagator::{
    dense_propagator, krylov_expv, step_propagator, KrylovOptions, Propagator, DENSE_MAX_DIM,
};
pub use state::{DensityMatrix, PureState, QuantumState, EIGEN_FLOOR, NORM_TOL, TRACE_TOL};
pub use unitary::evolve_unitary;
pub(crate) use state::l1_offdiag as state_l1;

/// Above this propagated dimension the default switches from dense to Krylov.
pub const AUTO_DENSE_LIMIT: usize = 512;

/// Unitary-run drift bounds, checked at every step.
pub const NORM_DRIFT_TOL: f64 = 1e-9;
pub const ENERGY_DRIFT_TOL: f64 = 1e-7;
/// Eigenvalue floor tolerated during open evolution.
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    KrylovExpm,
    DenseExpm,
    Rk4,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::KrylovExpm => "krylov-expm",
            Method::DenseExpm => "dense-expm",
            Method::Rk4 => "rk4",
        }
    }

    /// Default choice for a propagated space of dimension `dim`.
    pub fn auto(dim: usize) -> Self {
        if dim <= AUTO_DENSE_LIMIT {
            Method::DenseExpm
        } else {
            Method::KrylovExpm
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "krylov-expm" | "krylov" => Ok(Method::KrylovExpm),
            "dense-expm" | "dense" => Ok(Method::DenseExpm),
            "rk4" => Ok(Method::Rk4),
            _ => Err(Error::invalid(
                "integrator.method",
                format!("unknown method {s:?} (expected krylov-expm, dense-expm or rk4)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T> {
    /// `None` picks [`Method::auto`] for the propagated dimension.
    pub method: Option<Method>,
    pub dt: T,
    pub t_final: T,
    /// Record every `stride`-th step (the final time is always recorded).
    pub stride: usize,
    pub krylov: KrylovOptions,
    /// RK4 substeps are sized so that `h·‖L‖ ≤ rk4_safety`.
    pub rk4_safety: f64,
    /// Keep the full state in each record.
    pub snapshots: bool,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(dt: T, t_final: T) -> Self {
        Self {
            method: None,
            dt,
            t_final,
            stride: 1,
            krylov: KrylovOptions::default(),
            rk4_safety: 0.02,
            snapshots: false,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = Some(method);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_snapshots(mut self, on: bool) -> Self {
        self.snapshots = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut issues = Issues::new();
        issues.check(
            self.dt > T::zero() && self.dt.is_finite_val(),
            "integrator.dt",
            "dt must be positive and finite",
        );
        issues.check(
            self.t_final > T::zero() && self.t_final.is_finite_val(),
            "integrator.t_final",
            "total time must be positive and finite",
        );
        issues.check(self.dt <= self.t_final, "integrator.dt", "dt exceeds total time");
        issues.check(self.stride >= 1, "integrator.stride", "stride must be ≥ 1");
        issues.check(
            self.krylov.tol > 0.0 && self.krylov.max_dim >= 2,
            "integrator.krylov",
            "Krylov tolerance must be positive and basis size ≥ 2",
        );
        issues.check(
            self.rk4_safety > 0.0 && self.rk4_safety <= 1.0,
            "integrator.rk4_safety",
            "must lie in (0, 1]",
        );
        issues.into_result()
    }

    /// Step times `t_1 … t_n`: multiples of `dt`, with the last clipped to
    /// `t_final`.
    pub(crate) fn step_count(&self) -> usize {
        let ratio = (self.t_final / self.dt).to_f64_lossy();
        ((ratio - 1e-9).ceil() as usize).max(1)
    }

    pub(crate) fn time_at(&self, k: usize, n: usize) -> T {
        if k >= n {
            self.t_final
        } else {
            self.dt * T::from_usize_lossy(k)
        }
    }

    pub(crate) fn records_at(&self, k: usize, n: usize) -> bool {
        k.is_multiple_of(self.stride) || k == n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot<T: Real> {
    Pure(DVector<Complex<T>>),
    Density(DMatrix<Complex<T>>),
}

/// Observables at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Record<T: Real> {
    pub time: T,
    pub populations: Vec<T>,
    pub coherence_l1: T,
    /// Norm² for pure states, trace for density matrices.
    pub trace: T,
    /// `1 − trace`: weight absorbed by the sink.
    pub sink_captured: T,
    /// `⟨H⟩`, recorded by unitary runs.
    pub energy: Option<T>,
    pub snapshot: Option<Snapshot<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    records: Vec<Record<T>>,
    sink_site: Option<usize>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(records: Vec<Record<T>>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::invalid("trajectory", "no records"));
        }
        if records.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(Error::invalid("trajectory", "times must be strictly increasing"));
        }
        Ok(Self {
            records,
            sink_site: None,
        })
    }

    /// Marks the trajectory as produced with a trap on `site`.
    pub fn with_sink_site(mut self, site: Option<usize>) -> Self {
        self.sink_site = site;
        self
    }

    pub fn sink_site(&self) -> Option<usize> {
        self.sink_site
    }

    pub fn records(&self) -> &[Record<T>] {
        &self.records
    }

    pub fn first(&self) -> &Record<T> {
        &self.records[0]
    }

    pub fn last(&self) -> &Record<T> {
        self.records.last().expect("nonempty")
    }

    pub fn times(&self) -> Vec<T> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn n_sites(&self) -> usize {
        self.records[0].populations.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
