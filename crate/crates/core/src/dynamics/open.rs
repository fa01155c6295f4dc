//! Markovian open-system evolution on the site space:
//!
//! ```text
//! dρ/dt = −i[H, ρ]
//!       + Σ_i γ_i (P_i ρ P_i − ½{P_i, ρ})           local pure dephasing
//!       + Σ_hops r (L ρ L† − ½{L†L, ρ}),  L = |to⟩⟨from|
//!       − κ {P_sink, ρ}                             absorbing trap
//! ```
//!
//! The trap term is anti-Hermitian, so `tr ρ` decays and `1 − tr ρ` is the
//! captured weight.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Issues, Result};
use crate::model::{SiteNetwork, Sink};
use crate::operator::OperatorMatrix;
use crate::scalar::{Complex, Real};

use super::propagator::krylov_expv;
use super::state::l1_offdiag;
use super::{
    DensityMatrix, IntegratorConfig, Method, Record, Snapshot, Trajectory, DENSE_MAX_DIM,
    POSITIVITY_TOL,
};

/// Incoherent transfer `from → to` at `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop<T> {
    pub from: usize,
    pub to: usize,
    pub rate: T,
}

impl<T> Hop<T> {
    pub fn new(from: usize, to: usize, rate: T) -> Self {
        Self { from, to, rate }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec<T: Real> {
    pub dephasing: Vec<T>,
    pub hops: Vec<Hop<T>>,
    pub sink: Option<Sink<T>>,
}

impl<T: Real> ChannelSpec<T> {
    pub fn new(dephasing: Vec<T>, hops: Vec<Hop<T>>, sink: Option<Sink<T>>) -> Result<Self> {
        let ch = Self {
            dephasing,
            hops,
            sink,
        };
        ch.validate_for(ch.dephasing.len())?;
        Ok(ch)
    }

    /// No dissipation; the sink, if any, is taken from `net`.
    pub fn coherent(net: &SiteNetwork<T>) -> Self {
        Self {
            dephasing: vec![T::zero(); net.n_sites()],
            hops: Vec::new(),
            sink: net.sink(),
        }
    }

    /// Equal dephasing rate on every site, sink inherited from `net`.
    pub fn uniform_dephasing(net: &SiteNetwork<T>, gamma: T) -> Result<Self> {
        Self::new(vec![gamma; net.n_sites()], Vec::new(), net.sink())
    }

    pub fn with_dephasing(mut self, gamma: T) -> Result<Self> {
        self.dephasing.iter_mut().for_each(|g| *g = gamma);
        self.validate_for(self.dephasing.len())?;
        Ok(self)
    }

    pub fn validate_for(&self, n: usize) -> Result<()> {
        let mut issues = Issues::new();
        let rate_ok = |r: T| r >= T::zero() && r.is_finite_val();
        issues.check(
            self.dephasing.len() == n,
            "channel.dephasing",
            format!("expected {n} rates, got {}", self.dephasing.len()),
        );
        for (i, &g) in self.dephasing.iter().enumerate() {
            issues.check(
                rate_ok(g),
                format!("channel.dephasing[{i}]"),
                "rate must be nonnegative and finite",
            );
        }
        for (k, h) in self.hops.iter().enumerate() {
            let field = format!("channel.hops[{k}]");
            issues.check(
                h.from < n && h.to < n,
                &field,
                format!("site index ({} → {}) out of range", h.from, h.to),
            );
            issues.check(h.from != h.to, &field, "hop must connect distinct sites");
            issues.check(rate_ok(h.rate), &field, "rate must be nonnegative and finite");
        }
        if let Some(s) = self.sink {
            issues.check(s.site < n, "channel.sink.site", "sink site out of range");
            issues.check(rate_ok(s.rate), "channel.sink.rate", "rate must be nonnegative and finite");
        }
        issues.into_result()
    }
}

/// The generator `ρ ↦ dρ/dt`, applied to column-major `n × n` storage.
#[derive(Debug, Clone)]
pub struct Lindbladian<T: Real> {
    n: usize,
    hamiltonian: Vec<(usize, usize, Complex<T>)>,
    dephasing: Vec<T>,
    hops: Vec<Hop<T>>,
    sink: Option<Sink<T>>,
}

impl<T: Real> Lindbladian<T> {
    pub fn new(h_p: &OperatorMatrix<T>, channels: &ChannelSpec<T>) -> Result<Self> {
        if !h_p.is_hermitian() {
            return Err(Error::invalid("hamiltonian", "operator is not flagged Hermitian"));
        }
        h_p.check_hermitian()?;
        channels.validate_for(h_p.dim())?;
        Ok(Self {
            n: h_p.dim(),
            hamiltonian: h_p.iter().collect(),
            dephasing: channels.dephasing.clone(),
            hops: channels
                .hops
                .iter()
                .copied()
                .filter(|h| h.rate > T::zero())
                .collect(),
            sink: channels.sink.filter(|s| s.rate > T::zero()),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn apply(&self, rho: &[Complex<T>], out: &mut [Complex<T>]) {
        let n = self.n;
        let at = |i: usize, j: usize| i + j * n;
        let half = T::lit(0.5);
        for (k, o) in out.iter_mut().enumerate() {
            let (i, j) = (k % n, k / n);
            // dephasing: −½(γ_i + γ_j) ρ_ij off the diagonal
            *o = if i == j {
                Complex::new(T::zero(), T::zero())
            } else {
                rho[k] * (-(self.dephasing[i] + self.dephasing[j]) * half)
            };
        }
        for &(r, c, h) in &self.hamiltonian {
            // −i(Hρ)_{r,j} = −i h ρ_{c,j};  +i(ρH)_{i,c} = +i ρ_{i,r} h
            let mih = Complex::new(h.im, -h.re);
            let pih = Complex::new(-h.im, h.re);
            for j in 0..n {
                out[at(r, j)] += mih * rho[at(c, j)];
            }
            for i in 0..n {
                out[at(i, c)] += pih * rho[at(i, r)];
            }
        }
        for hop in &self.hops {
            let (a, b, rate) = (hop.from, hop.to, hop.rate);
            out[at(b, b)] += rho[at(a, a)] * rate;
            let hr = rate * half;
            for j in 0..n {
                out[at(a, j)] -= rho[at(a, j)] * hr;
            }
            for i in 0..n {
                out[at(i, a)] -= rho[at(i, a)] * hr;
            }
        }
        if let Some(Sink { site: s, rate }) = self.sink {
            for j in 0..n {
                out[at(s, j)] -= rho[at(s, j)] * rate;
            }
            for i in 0..n {
                out[at(i, s)] -= rho[at(i, s)] * rate;
            }
        }
    }

    /// Crude upper bound on the generator norm, used to size RK4 substeps.
    pub fn norm_bound(&self) -> T {
        let mut rows = vec![T::zero(); self.n];
        for &(r, _, h) in &self.hamiltonian {
            rows[r] += h.norm_sqr().sqrt();
        }
        let h_norm = rows.iter().fold(T::zero(), |m, &x| if x > m { x } else { m });
        let gamma = self.dephasing.iter().fold(T::zero(), |m, &x| if x > m { x } else { m });
        let mut out_rate = vec![T::zero(); self.n];
        for h in &self.hops {
            out_rate[h.from] += h.rate;
        }
        let hop = out_rate.iter().fold(T::zero(), |m, &x| if x > m { x } else { m });
        let sink = self.sink.map_or(T::zero(), |s| s.rate);
        T::lit(2.0) * (h_norm + hop + sink) + gamma
    }

    /// Dense `n² × n²` matrix acting on column-major `vec(ρ)`.
    pub fn superoperator(&self) -> DMatrix<Complex<T>> {
        let d = self.n * self.n;
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![Complex::new(T::zero(), T::zero()); d];
        let mut col = vec![Complex::new(T::zero(), T::zero()); d];
        for k in 0..d {
            e[k] = Complex::new(T::one(), T::zero());
            self.apply(&e, &mut col);
            m.column_mut(k).copy_from_slice(&col);
            e[k] = Complex::new(T::zero(), T::zero());
        }
        m
    }
}

enum Stepper<T: Real> {
    Dense(DMatrix<Complex<T>>),
    Krylov,
    Rk4 { substeps: usize },
}

fn rk4_step<T: Real>(l: &Lindbladian<T>, rho: &mut DVector<Complex<T>>, h: T, substeps: usize) {
    let d = rho.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut k1 = DVector::from_element(d, zero);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let half = h * T::lit(0.5);
    let sixth = h / T::lit(6.0);
    for _ in 0..substeps {
        l.apply(rho.as_slice(), k1.as_mut_slice());
        tmp.copy_from(rho);
        tmp.axpy(Complex::new(half, T::zero()), &k1, Complex::new(T::one(), T::zero()));
        l.apply(tmp.as_slice(), k2.as_mut_slice());
        tmp.copy_from(rho);
        tmp.axpy(Complex::new(half, T::zero()), &k2, Complex::new(T::one(), T::zero()));
        l.apply(tmp.as_slice(), k3.as_mut_slice());
        tmp.copy_from(rho);
        tmp.axpy(Complex::new(h, T::zero()), &k3, Complex::new(T::one(), T::zero()));
        l.apply(tmp.as_slice(), k4.as_mut_slice());
        for i in 0..d {
            rho[i] += (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * sixth;
        }
    }
}

fn record<T: Real>(time: T, rho: &DMatrix<Complex<T>>, snapshot: bool) -> Record<T> {
    let populations: Vec<T> = rho.diagonal().iter().map(|z| z.re).collect();
    let trace = populations.iter().fold(T::zero(), |s, &p| s + p);
    Record {
        time,
        coherence_l1: l1_offdiag(rho),
        trace,
        sink_captured: T::one() - trace,
        populations,
        energy: None,
        snapshot: snapshot.then(|| Snapshot::Density(rho.clone())),
    }
}

/// Integrates the master equation from `rho0` under `h_p` and `channels`.
///
/// Default method: dense exponential of the superoperator while `n² ≤ 512`,
/// Krylov above; `rk4` on request. Each recorded state is checked for
/// positivity (smallest eigenvalue ≥ −[`POSITIVITY_TOL`]).
pub fn evolve_open<T: Real>(
    h_p: &OperatorMatrix<T>,
    channels: &ChannelSpec<T>,
    rho0: &DensityMatrix<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    if rho0.n_sites() != h_p.dim() {
        return Err(Error::invalid(
            "state",
            format!("density matrix is {}×{}, Hamiltonian {}", rho0.n_sites(), rho0.n_sites(), h_p.dim()),
        ));
    }
    let l = Lindbladian::new(h_p, channels)?;
    let n = l.n_sites();
    let d = n * n;
    let method = cfg.method.unwrap_or_else(|| Method::auto(d));
    let steps = cfg.step_count();
    let last_dt = cfg.t_final - cfg.time_at(steps - 1, steps);

    let make = |dt: T| -> Result<Stepper<T>> {
        Ok(match method {
            Method::DenseExpm => {
                if d > DENSE_MAX_DIM {
                    return Err(Error::Resource(format!(
                        "dense superoperator exponential unavailable for {n} sites \
                         (dimension {d}, limit {DENSE_MAX_DIM})"
                    )));
                }
                Stepper::Dense((l.superoperator() * Complex::new(dt, T::zero())).exp())
            }
            Method::KrylovExpm => Stepper::Krylov,
            Method::Rk4 => {
                let ratio = (dt * l.norm_bound()).to_f64_lossy() / cfg.rk4_safety;
                Stepper::Rk4 {
                    substeps: (ratio.ceil() as usize).max(1),
                }
            }
        })
    };
    let full = make(cfg.dt)?;
    let tail = make(last_dt)?;

    let advance = |stepper: &Stepper<T>, dt: T, v: &DVector<Complex<T>>, t: T| -> Result<DVector<Complex<T>>> {
        match stepper {
            Stepper::Dense(s) => Ok(s * v),
            Stepper::Krylov => krylov_expv(|x, y| l.apply(x, y), v, dt, cfg.krylov)
                .map_err(|e| e.context(&format!("open evolution near t = {}", t.to_f64_lossy()))),
            Stepper::Rk4 { substeps } => {
                let mut out = v.clone();
                rk4_step(&l, &mut out, dt / T::from_usize_lossy(*substeps), *substeps);
                Ok(out)
            }
        }
    };

    let floor = -T::lit(POSITIVITY_TOL);
    let mut records = vec![record(T::zero(), rho0.matrix(), cfg.snapshots)];
    let mut v = DVector::from_column_slice(rho0.matrix().as_slice());
    for k in 1..=steps {
        let t = cfg.time_at(k, steps);
        let (stepper, dt) = if k == steps { (&tail, last_dt) } else { (&full, cfg.dt) };
        v = advance(stepper, dt, &v, t)?;
        if cfg.records_at(k, steps) {
            let rho = DMatrix::from_column_slice(n, n, v.as_slice());
            let lo = DensityMatrix::from_raw(rho.clone()).min_eigenvalue();
            if lo < floor {
                return Err(Error::integrator(
                    t.to_f64_lossy(),
                    format!(
                        "density matrix lost positivity (eigenvalue {:e}); use a smaller dt \
                         or another method than {method}",
                        lo.to_f64_lossy()
                    ),
                ));
            }
            records.push(record(t, &rho, cfg.snapshots));
        }
    }
    Ok(Trajectory::new(records)?.with_sink_site(channels.sink.map(|s| s.site)))
}
