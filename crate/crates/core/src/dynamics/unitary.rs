use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;
use crate::scalar::{tolerance, Real};

use super::state::l1_offdiag;
use super::{
    step_propagator, IntegratorConfig, Method, PureState, Record, Snapshot, Trajectory,
    ENERGY_DRIFT_TOL, NORM_DRIFT_TOL,
};

fn record<T: Real>(
    time: T,
    psi: &PureState<T>,
    h: &OperatorMatrix<T>,
    snapshot: bool,
) -> Record<T> {
    let trace = psi.amplitudes().norm_squared();
    Record {
        time,
        populations: psi.populations(),
        coherence_l1: l1_offdiag(&psi.reduced_density()),
        trace,
        sink_captured: T::one() - trace,
        energy: Some(h.expectation(psi.amplitudes()).re),
        snapshot: snapshot.then(|| Snapshot::Pure(psi.amplitudes().clone())),
    }
}

/// Propagates `ψ(t + dt) = exp(−iH dt) ψ(t)`.
///
/// Norm and `⟨H⟩` are checked after every step; a drift beyond
/// [`NORM_DRIFT_TOL`] or [`ENERGY_DRIFT_TOL`] (relative to
/// `max(|⟨H⟩₀|, max|H_ij|)`) aborts with an integrator error.
pub fn evolve_unitary<T: Real>(
    h: &OperatorMatrix<T>,
    psi0: &PureState<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    if h.dim() != psi0.dim() {
        return Err(Error::invalid(
            "state",
            format!("state dimension {} vs Hamiltonian {}", psi0.dim(), h.dim()),
        ));
    }
    if !h.is_hermitian() {
        return Err(Error::invalid("hamiltonian", "operator is not flagged Hermitian"));
    }
    h.check_hermitian()?;

    let method = cfg.method.unwrap_or_else(|| Method::auto(h.dim()));
    let n = cfg.step_count();
    let full = step_propagator(h, cfg.dt, method, cfg.krylov)?;
    let last_dt = cfg.t_final - cfg.time_at(n - 1, n);
    let tail = if (last_dt - cfg.dt).abs() <= cfg.dt * T::lit(1e-12) {
        None
    } else {
        Some(step_propagator(h, last_dt, method, cfg.krylov)?)
    };

    let norm0 = psi0.norm();
    let e0 = h.expectation(psi0.amplitudes()).re;
    let scale = {
        let m = h.max_abs();
        if e0.abs() > m {
            e0.abs()
        } else {
            m
        }
    };
    let norm_tol = tolerance::<T>(NORM_DRIFT_TOL);
    let energy_tol = tolerance::<T>(ENERGY_DRIFT_TOL) * scale;

    let mut records = vec![record(T::zero(), psi0, h, cfg.snapshots)];
    let mut psi = psi0.amplitudes().clone();
    for k in 1..=n {
        let prop = match (&tail, k == n) {
            (Some(p), true) => p,
            _ => &full,
        };
        let t = cfg.time_at(k, n);
        psi = prop.apply(&psi).map_err(|e| match e {
            Error::Integrator { message, .. } => Error::integrator(t.to_f64_lossy(), message),
            other => other,
        })?;
        let state = PureState::from_raw(psi, psi0.bath_dim());
        let drift = (state.norm() - norm0).abs();
        if drift > norm_tol {
            return Err(Error::integrator(
                t.to_f64_lossy(),
                format!("norm drift {drift:e} exceeds {NORM_DRIFT_TOL:e} ({method})"),
            ));
        }
        let e = h.expectation(state.amplitudes()).re;
        if (e - e0).abs() > energy_tol {
            return Err(Error::integrator(
                t.to_f64_lossy(),
                format!(
                    "energy drift {:e} exceeds {ENERGY_DRIFT_TOL:e} relative ({method})",
                    ((e - e0) / scale).to_f64_lossy()
                ),
            ));
        }
        if cfg.records_at(k, n) {
            records.push(record(t, &state, h, cfg.snapshots));
        }
        psi = state.amplitudes().clone();
    }
    Trajectory::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_system_hamiltonian, SiteNetwork};
    use crate::scalar::c;
    use nalgebra::DVector;

    #[test]
    fn zero_hamiltonian_is_static() {
        let h = OperatorMatrix::<f64>::zeros(3);
        let psi = PureState::normalized(
            DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.5)]),
            1,
        )
        .unwrap();
        let traj = evolve_unitary(&h, &psi, &IntegratorConfig::new(0.5, 5.0)).unwrap();
        for r in traj.records() {
            for (a, b) in r.populations.iter().zip(psi.populations()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let h = OperatorMatrix::<f64>::zeros(3);
        let psi = PureState::on_sites(DVector::from_vec(vec![c(1.0, 0.0)])).unwrap();
        assert!(evolve_unitary(&h, &psi, &IntegratorConfig::new(0.1, 1.0)).is_err());
    }

    #[test]
    fn records_follow_stride_and_final_time() {
        let net = SiteNetwork::chain(vec![0.0; 2], 1.0).unwrap();
        let h = build_system_hamiltonian(&net);
        let psi = PureState::on_sites(DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        let cfg = IntegratorConfig::new(0.1, 1.05).with_stride(3);
        let traj = evolve_unitary(&h, &psi, &cfg).unwrap();
        let times: Vec<f64> = traj.times();
        assert_eq!(times.len(), 5);
        assert_eq!(times[0], 0.0);
        assert!((times[1] - 0.3).abs() < 1e-12);
        assert_eq!(*times.last().unwrap(), 1.05);
    }

    #[test]
    fn single_precision_rabi() {
        let net = SiteNetwork::<f32>::chain(vec![0.0; 2], 1.0).unwrap();
        let h = build_system_hamiltonian(&net);
        let psi = PureState::on_sites(DVector::from_vec(vec![c(1.0f32, 0.0), c(0.0, 0.0)])).unwrap();
        let t = std::f32::consts::FRAC_PI_2;
        let traj = evolve_unitary(&h, &psi, &IntegratorConfig::new(t / 8.0, t)).unwrap();
        assert!((traj.last().populations[1] - 1.0).abs() < 1e-5);
    }
}
