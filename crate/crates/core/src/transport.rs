//! Transport observables and the dephasing sweeps built on them.

use rayon::prelude::*;

use crate::dynamics::{
    evolve_open, ChannelSpec, DensityMatrix, IntegratorConfig, QuantumState, Trajectory,
};
use crate::error::{Error, Result};
use crate::model::{build_system_hamiltonian, SiteNetwork};
use crate::scalar::Real;
use crate::walks::fit_spreading_exponent;

/// Captured fraction that defines the transfer time.
pub const DEFAULT_CAPTURE_THRESHOLD: f64 = 0.5;
/// Efficiency horizon in units of the inverse largest hopping amplitude.
pub const DEFAULT_HORIZON_PER_COUPLING: f64 = 50.0;

pub fn site_populations<T: Real>(state: &QuantumState<T>) -> Vec<T> {
    match state {
        QuantumState::Pure(psi) => psi.populations(),
        QuantumState::Density(rho) => rho.populations(),
    }
}

/// `Σ_{i≠j} |ρ_ij|`.
pub fn coherence_l1<T: Real>(rho: &DensityMatrix<T>) -> T {
    crate::dynamics::state_l1(rho.matrix())
}

/// `MSD(t) = Σ_i P_i(t) (x_i − x_origin)²` for every record.
pub fn mean_squared_displacement<T: Real>(
    traj: &Trajectory<T>,
    coordinates: Option<&[T]>,
    origin_site: usize,
) -> Result<Vec<(T, T)>> {
    let coords = coordinates.ok_or_else(|| {
        Error::invalid("network.coordinates", "site coordinates are required for displacement")
    })?;
    if coords.len() != traj.n_sites() {
        return Err(Error::invalid(
            "network.coordinates",
            format!("{} coordinates for {} sites", coords.len(), traj.n_sites()),
        ));
    }
    if origin_site >= coords.len() {
        return Err(Error::invalid("observables.origin_site", "origin site out of range"));
    }
    let x0 = coords[origin_site];
    Ok(traj
        .records()
        .iter()
        .map(|r| {
            let msd = r
                .populations
                .iter()
                .zip(coords)
                .fold(T::zero(), |s, (&p, &x)| s + p * (x - x0) * (x - x0));
            (r.time, msd)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency<T> {
    /// Weight captured by the sink at the final time, `1 − tr ρ(T)`.
    pub eta: T,
    /// First recorded time at which the capture reached the threshold;
    /// `None` stands for "never" (∞).
    pub t_threshold: Option<T>,
}

pub fn transfer_efficiency<T: Real>(traj: &Trajectory<T>) -> Result<Efficiency<T>> {
    transfer_efficiency_at(traj, T::lit(DEFAULT_CAPTURE_THRESHOLD))
}

pub fn transfer_efficiency_at<T: Real>(traj: &Trajectory<T>, threshold: T) -> Result<Efficiency<T>> {
    if traj.sink_site().is_none() {
        return Err(Error::invalid("network.sink", "transfer efficiency needs a sink"));
    }
    let clamp = |x: T| if x < T::zero() { T::zero() } else { x };
    Ok(Efficiency {
        eta: clamp(traj.last().sink_captured),
        t_threshold: traj
            .records()
            .iter()
            .find(|r| r.sink_captured >= threshold)
            .map(|r| r.time),
    })
}

/// Everything needed for one open-system run apart from the dephasing rate.
#[derive(Debug, Clone)]
pub struct OpenScenario<T: Real> {
    pub network: SiteNetwork<T>,
    pub channels: ChannelSpec<T>,
    pub initial: DensityMatrix<T>,
    pub integrator: IntegratorConfig<T>,
    pub threshold: T,
}

impl<T: Real> OpenScenario<T> {
    /// Starts on `initial_site`, channels without dephasing, horizon
    /// `50 / max|t_ij|` sampled every `dt`.
    pub fn new(network: SiteNetwork<T>, initial_site: usize, dt: T) -> Result<Self> {
        let j = network.max_coupling();
        let horizon = if j > T::zero() {
            T::lit(DEFAULT_HORIZON_PER_COUPLING) / j
        } else {
            T::lit(DEFAULT_HORIZON_PER_COUPLING)
        };
        Ok(Self {
            channels: ChannelSpec::coherent(&network),
            initial: DensityMatrix::localized(network.n_sites(), initial_site)?,
            integrator: IntegratorConfig::new(dt, horizon),
            threshold: T::lit(DEFAULT_CAPTURE_THRESHOLD),
            network,
        })
    }

    pub fn run(&self) -> Result<Trajectory<T>> {
        let h = build_system_hamiltonian(&self.network);
        evolve_open(&h, &self.channels, &self.initial, &self.integrator)
    }

    /// Same scenario with every site dephasing at `gamma`.
    pub fn with_dephasing(&self, gamma: T) -> Result<Self> {
        let mut s = self.clone();
        s.channels = s.channels.with_dephasing(gamma)?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyPoint<T> {
    pub parameter: T,
    pub eta: T,
    pub t_threshold: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyCurve<T> {
    pub variable: String,
    pub points: Vec<EfficiencyPoint<T>>,
}

impl<T: Real> EfficiencyCurve<T> {
    pub fn best(&self) -> &EfficiencyPoint<T> {
        self.points
            .iter()
            .fold(&self.points[0], |b, p| if p.eta > b.eta { p } else { b })
    }

    /// `max η / max(η_first, η_last) − 1` when the maximum is strictly
    /// inside the grid, otherwise `None`.
    pub fn interior_gain(&self) -> Option<T> {
        let k = self
            .points
            .iter()
            .enumerate()
            .fold(0, |b, (i, p)| if p.eta > self.points[b].eta { i } else { b });
        if k == 0 || k + 1 == self.points.len() {
            return None;
        }
        let first = self.points[0].eta;
        let last = self.points[self.points.len() - 1].eta;
        let edge = if first > last { first } else { last };
        Some(self.points[k].eta / edge - T::one())
    }
}

fn check_grid<T: Real>(grid: &[T], field: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(field, "grid is empty"));
    }
    if grid.iter().any(|g| *g < T::zero() || !g.is_finite_val()) {
        return Err(Error::invalid(field, "rates must be nonnegative and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(field, "grid must be strictly increasing"));
    }
    Ok(())
}

fn parallel_map<T, R, F>(grid: &[T], jobs: usize, f: F) -> Result<Vec<R>>
where
    T: Real,
    R: Send,
    F: Fn(T) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    pool.install(|| grid.par_iter().map(|&g| f(g)).collect())
}

/// Logarithmically spaced grid of `n` points from `lo` to `hi` inclusive.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Result<Vec<T>> {
    if !(lo > T::zero() && hi > lo && n >= 2) {
        return Err(Error::invalid("grid", "need 0 < lo < hi and at least two points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = T::from_usize_lossy(n - 1);
    Ok((0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (a + (b - a) * T::from_usize_lossy(k) / last).exp()
            }
        })
        .collect())
}

/// One open run per dephasing rate; results in grid order. `jobs = 0` uses
/// all cores.
pub fn sweep_dephasing<T: Real>(
    scenario: &OpenScenario<T>,
    gammas: &[T],
    jobs: usize,
) -> Result<EfficiencyCurve<T>> {
    check_grid(gammas, "sweep.gammas")?;
    if scenario.network.sink().is_none() && scenario.channels.sink.is_none() {
        return Err(Error::invalid("network.sink", "a dephasing sweep needs a sink"));
    }
    let points = parallel_map(gammas, jobs, |g| {
        let annotate = |e: Error| e.context(&format!("gamma = {}", g.to_f64_lossy()));
        let traj = scenario.with_dephasing(g)?.run().map_err(annotate)?;
        let eff = transfer_efficiency_at(&traj, scenario.threshold)?;
        Ok(EfficiencyPoint {
            parameter: g,
            eta: eff.eta,
            t_threshold: eff.t_threshold,
        })
    })?;
    Ok(EfficiencyCurve {
        variable: "gamma".to_owned(),
        points,
    })
}

/// Chain spreading experiment: a particle released on `origin_site` of a
/// 1-D chain, width fitted over `window`.
#[derive(Debug, Clone)]
pub struct CrossoverSetup<T: Real> {
    pub network: SiteNetwork<T>,
    pub origin_site: usize,
    pub window: (T, T),
    pub integrator: IntegratorConfig<T>,
}

/// `[2/J, 0.4·N/(2v)]` with light-cone speed `v = 2J`: late enough to leave
/// the initial transient, early enough to avoid boundary reflections.
pub fn default_fit_window<T: Real>(net: &SiteNetwork<T>) -> (T, T) {
    let j = net.max_coupling();
    let j = if j > T::zero() { j } else { T::one() };
    let v = T::lit(2.0) * j;
    (
        T::lit(2.0) / j,
        T::lit(0.4) * T::from_usize_lossy(net.n_sites()) / (T::lit(2.0) * v),
    )
}

impl<T: Real> CrossoverSetup<T> {
    pub fn new(network: SiteNetwork<T>, origin_site: usize, dt: T) -> Result<Self> {
        let window = default_fit_window(&network);
        let setup = Self {
            integrator: IntegratorConfig::new(dt, window.1),
            network,
            origin_site,
            window,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn with_window(mut self, lo: T, hi: T) -> Result<Self> {
        self.window = (lo, hi);
        self.integrator.t_final = hi;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.network.coordinates().is_none() {
            return Err(Error::invalid(
                "network.coordinates",
                "crossover scan needs a 1-D chain with site coordinates",
            ));
        }
        if self.network.sink().is_some() {
            return Err(Error::invalid("network.sink", "crossover scan runs without a sink"));
        }
        if self.origin_site >= self.network.n_sites() {
            return Err(Error::invalid("crossover.origin_site", "origin site out of range"));
        }
        let (lo, hi) = self.window;
        if !(lo > T::zero() && hi > lo) {
            return Err(Error::invalid("crossover.window", "need 0 < start < end"));
        }
        Ok(())
    }

    /// Latest time before the fastest front (speed `2J`) reaches an end of
    /// the chain.
    pub fn reflection_time(&self) -> T {
        let coords = self.network.coordinates().expect("validated");
        let x0 = coords[self.origin_site];
        let lo = coords.iter().fold(x0, |m, &x| if x < m { x } else { m });
        let hi = coords.iter().fold(x0, |m, &x| if x > m { x } else { m });
        let d = if x0 - lo < hi - x0 { x0 - lo } else { hi - x0 };
        d / (T::lit(2.0) * self.network.max_coupling())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverPoint<T> {
    pub gamma: T,
    pub exponent: T,
    pub residual: T,
    pub exponent_stderr: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverReport<T> {
    pub points: Vec<CrossoverPoint<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> CrossoverReport<T> {
    /// `α` never rises by more than the combined fit error bars of two
    /// neighbouring grid points.
    pub fn is_non_increasing(&self) -> bool {
        self.points.windows(2).all(|w| {
            let slack = w[0].exponent_stderr + w[1].exponent_stderr + w[0].residual + w[1].residual;
            w[1].exponent <= w[0].exponent + slack + T::lit(1e-12)
        })
    }
}

/// Width exponent of the spreading packet for each dephasing rate.
pub fn crossover_scan<T: Real>(
    setup: &CrossoverSetup<T>,
    gammas: &[T],
    jobs: usize,
) -> Result<CrossoverReport<T>> {
    setup.validate()?;
    check_grid(gammas, "crossover.gammas")?;
    let mut warnings = Vec::new();
    let t_reflect = setup.reflection_time();
    if setup.window.1 > t_reflect {
        warnings.push(format!(
            "fit window ends at t = {} but boundary reflections start near t = {}",
            setup.window.1.to_f64_lossy(),
            t_reflect.to_f64_lossy()
        ));
    }
    let h = build_system_hamiltonian(&setup.network);
    let rho0 = DensityMatrix::localized(setup.network.n_sites(), setup.origin_site)?;
    let mut cfg = setup.integrator.clone();
    cfg.t_final = setup.window.1;
    let coords = setup.network.coordinates();

    let points = parallel_map(gammas, jobs, |g| {
        let annotate = |e: Error| e.context(&format!("gamma = {}", g.to_f64_lossy()));
        let channels = ChannelSpec::uniform_dephasing(&setup.network, g)?;
        let traj = evolve_open(&h, &channels, &rho0, &cfg).map_err(annotate)?;
        let msd = mean_squared_displacement(&traj, coords, setup.origin_site)?;
        let samples: Vec<(T, T)> = msd
            .into_iter()
            .filter(|&(t, _)| t >= setup.window.0 && t <= setup.window.1)
            .map(|(t, m)| (t, m.sqrt()))
            .collect();
        let fit = fit_spreading_exponent(&samples).map_err(annotate)?;
        Ok(CrossoverPoint {
            gamma: g,
            exponent: fit.exponent,
            residual: fit.residual,
            exponent_stderr: fit.exponent_stderr,
        })
    })?;
    Ok(CrossoverReport { points, warnings })
}
