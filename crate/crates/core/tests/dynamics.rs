mod common;

use std::f64::consts::PI;

use common::*;
use holstein_core::dynamics::{
    dense_propagator, evolve_open, evolve_unitary, step_propagator, ChannelSpec, DensityMatrix,
    Hop, IntegratorConfig, KrylovOptions, Lindbladian, Method, PureState, Snapshot, Trajectory,
};
use holstein_core::model::{
    build_system_hamiltonian, build_total_hamiltonian, generate_disordered_network, BathSpec,
    Distribution, Mode, ProductBasis, SiteNetwork, Topology,
};
use holstein_core::operator::OperatorMatrix;
use holstein_core::transport::coherence_l1;
use holstein_core::Category;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn density_snapshot(r: &holstein_core::Record<f64>) -> &DMatrix<C> {
    match r.snapshot.as_ref().expect("snapshot") {
        Snapshot::Density(m) => m,
        Snapshot::Pure(_) => panic!("expected a density matrix"),
    }
}

fn pure_snapshot(r: &holstein_core::Record<f64>) -> &DVector<C> {
    match r.snapshot.as_ref().expect("snapshot") {
        Snapshot::Pure(v) => v,
        Snapshot::Density(_) => panic!("expected a pure state"),
    }
}

/// Norm and energy drift of every record, relative as the integrator defines it.
fn assert_conserved(traj: &Trajectory<f64>, h: &OperatorMatrix<f64>) {
    let first = traj.first();
    let e0 = first.energy.unwrap();
    let scale = e0.abs().max(h.max_abs());
    for r in traj.records() {
        assert!((r.trace.sqrt() - first.trace.sqrt()).abs() <= 1e-9, "t={}", r.time);
        assert!((r.energy.unwrap() - e0).abs() <= 1e-7 * scale, "t={}", r.time);
    }
}

fn assert_physical(traj: &Trajectory<f64>, with_sink: bool) {
    let mut prev = f64::INFINITY;
    for r in traj.records() {
        let rho = density_snapshot(r);
        let herm = (rho - rho.adjoint()).camax();
        assert!(herm <= 1e-10, "hermiticity {herm} at t={}", r.time);
        let min = DensityMatrix::with_trace(rho.clone(), r.trace)
            .map(|d| d.min_eigenvalue())
            .unwrap_or_else(|e| panic!("invalid state at t={}: {e}", r.time));
        assert!(min >= -1e-8);
        if with_sink {
            assert!(r.trace <= prev + 1e-12);
        } else {
            assert!((r.trace - 1.0).abs() <= 1e-9, "trace {} at t={}", r.trace, r.time);
        }
        prev = r.trace;
    }
}

#[test]
fn zero_hamiltonian_leaves_state_unchanged() {
    let h = OperatorMatrix::<f64>::zeros(3).into_hermitian().unwrap();
    let psi = PureState::on_sites(DVector::from_vec(vec![cx(0.6, 0.0), cx(0.0, 0.8), cx(0.0, 0.0)]))
        .unwrap();
    let cfg = IntegratorConfig::new(0.25, 2.0).with_snapshots(true);
    let traj = evolve_unitary(&h, &psi, &cfg).unwrap();
    for r in traj.records() {
        assert_eq!(pure_snapshot(r), psi.amplitudes());
    }
}

#[test]
fn dimer_rabi_oscillation() {
    let j = 1.3;
    let net = SiteNetwork::chain(vec![0.0, 0.0], j).unwrap();
    let h = build_system_hamiltonian(&net);
    let t_half = PI / (2.0 * j);
    for method in [Method::DenseExpm, Method::KrylovExpm] {
        let cfg = IntegratorConfig::new(t_half / 40.0, t_half).with_method(method);
        let psi = PureState::on_sites(DVector::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)])).unwrap();
        let traj = evolve_unitary(&h, &psi, &cfg).unwrap();
        assert_conserved(&traj, &h);
        for r in traj.records() {
            assert!((r.populations[1] - (j * r.time).sin().powi(2)).abs() <= 1e-10);
        }
        let last = traj.last();
        assert!((last.time - t_half).abs() < 1e-15);
        assert!((last.populations[1] - 1.0).abs() <= 1e-8, "{method}: {}", last.populations[1]);
    }
}

#[test]
fn joint_evolution_matches_spectral_decomposition() {
    let net = SiteNetwork::chain(vec![0.2, -0.4], 0.7).unwrap();
    let g = DMatrix::from_row_slice(2, 1, &[0.3, -0.5]);
    let bath = BathSpec::new(vec![Mode::new(1.1, 3)], g.clone()).unwrap();
    let basis = ProductBasis::new(2, vec![3]).unwrap();
    assert_eq!(basis.total_dim(), 8);
    let h = build_total_hamiltonian(&net, &bath, &basis).unwrap();
    let oracle_h = joint_hamiltonian(
        &real_part(&build_system_hamiltonian(&net).to_dense()),
        &[1.1],
        &[3],
        &g,
    );

    let mut amps = DVector::from_fn(8, |k, _| cx(1.0 / (k + 1) as f64, 0.1 * k as f64));
    amps /= cx(amps.norm(), 0.0);
    let psi = PureState::new(amps.clone(), basis.bath_dim()).unwrap();
    for method in [Method::DenseExpm, Method::KrylovExpm] {
        let cfg = IntegratorConfig::new(0.1, 12.0).with_method(method).with_snapshots(true);
        let traj = evolve_unitary(&h, &psi, &cfg).unwrap();
        assert_conserved(&traj, &h);
        for r in traj.records() {
            let expect = spectral_evolve(&oracle_h, &amps, r.time);
            let diff = (pure_snapshot(r) - expect).camax();
            assert!(diff <= 1e-8, "{method} t={} diff={diff}", r.time);
        }
    }
}

#[test]
fn krylov_matches_dense_on_random_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let n = 64;
    let mut entries = Vec::new();
    for i in 0..n {
        entries.push((i, i, cx(rng.random_range(-2.0..2.0), 0.0)));
        for j in 0..i {
            let z = cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            entries.push((i, j, z));
            entries.push((j, i, z.conj()));
        }
    }
    let h = OperatorMatrix::from_triplets(n, entries).unwrap().into_hermitian().unwrap();
    let mut v = DVector::from_fn(n, |_, _| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    v /= cx(v.norm(), 0.0);
    for dt in [0.01, 0.1, 0.5, 2.0] {
        let u = dense_propagator(&h, dt).unwrap();
        assert!((u.adjoint() * &u - DMatrix::identity(n, n)).camax() <= 1e-10);
        let dense = step_propagator(&h, dt, Method::DenseExpm, KrylovOptions::default())
            .unwrap()
            .apply(&v)
            .unwrap();
        let krylov = step_propagator(&h, dt, Method::KrylovExpm, KrylovOptions::default())
            .unwrap()
            .apply(&v)
            .unwrap();
        assert!((dense - krylov).camax() <= 1e-9, "dt={dt}");
    }
}

#[test]
fn propagator_edge_cases() {
    let h = OperatorMatrix::from_diagonal(&[2.5]);
    let v = DVector::from_element(1, cx(1.0, 0.0));
    for method in [Method::DenseExpm, Method::KrylovExpm] {
        let id = step_propagator(&h, 0.0, method, KrylovOptions::default()).unwrap();
        assert_eq!(id.apply(&v).unwrap(), v);
        let u = step_propagator(&h, 0.4, method, KrylovOptions::default()).unwrap();
        let z = u.apply(&v).unwrap()[0];
        assert!((z - C::from_polar(1.0, -1.0)).norm() < 1e-14, "{method}");
    }
}

#[test]
fn rk4_is_rejected_for_unitary_runs() {
    let h = OperatorMatrix::<f64>::from_diagonal(&[1.0, 2.0]);
    let psi = PureState::on_sites(DVector::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)])).unwrap();
    let cfg = IntegratorConfig::new(0.1, 1.0).with_method(Method::Rk4);
    assert!(evolve_unitary(&h, &psi, &cfg).is_err());
}

#[test]
fn non_hermitian_and_mismatched_inputs_are_rejected() {
    let h = OperatorMatrix::from_triplets(2, vec![(0, 1, cx(1.0, 0.0))]).unwrap();
    let psi = PureState::on_sites(DVector::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)])).unwrap();
    let cfg = IntegratorConfig::new(0.1, 1.0);
    assert_eq!(evolve_unitary(&h, &psi, &cfg).unwrap_err().category(), Category::Validation);
    let h3 = OperatorMatrix::<f64>::from_diagonal(&[1.0, 2.0, 3.0]);
    assert_eq!(evolve_unitary(&h3, &psi, &cfg).unwrap_err().category(), Category::Validation);
    let bad = ChannelSpec::new(vec![-1.0, 0.0, 0.0], vec![], None);
    assert!(bad.is_err());
}

/// Column-major superoperator assembled from Kronecker products,
/// `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
fn oracle_generator(h: &DMatrix<f64>, gammas: &[f64], hops: &[Hop<f64>], sink: Option<(usize, f64)>) -> DMatrix<C> {
    let n = h.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let proj = |i: usize| {
        let mut p = DMatrix::zeros(n, n);
        p[(i, i)] = 1.0;
        p
    };
    let comm = kron(&id, h) - kron(&h.transpose(), &id);
    let mut l = comm.map(|x| cx(0.0, -x));
    let mut real = DMatrix::<f64>::zeros(n * n, n * n);
    for (i, &g) in gammas.iter().enumerate() {
        let p = proj(i);
        real += (kron(&p, &p) - kron(&id, &p) * 0.5 - kron(&p, &id) * 0.5) * g;
    }
    for hop in hops {
        let mut jump = DMatrix::zeros(n, n);
        jump[(hop.to, hop.from)] = 1.0;
        let jj = jump.transpose() * &jump;
        real += (kron(&jump, &jump) - kron(&id, &jj) * 0.5 - kron(&jj.transpose(), &id) * 0.5)
            * hop.rate;
    }
    if let Some((s, kappa)) = sink {
        let p = proj(s);
        real -= (kron(&id, &p) + kron(&p, &id)) * kappa;
    }
    l += real.map(|x| cx(x, 0.0));
    l
}

#[test]
fn generator_matches_kronecker_oracle() {
    let net = generate_disordered_network::<f64>(
        4,
        &Topology::Ring,
        Distribution::Uniform { lo: -1.0, hi: 1.0 },
        Distribution::Uniform { lo: 0.2, hi: 1.0 },
        5,
    )
    .unwrap();
    let gammas = vec![0.1, 0.4, 0.0, 1.3];
    let hops = vec![Hop::new(0, 2, 0.3), Hop::new(3, 1, 0.05)];
    let ch = ChannelSpec::new(gammas.clone(), hops.clone(), Some(holstein_core::model::Sink { site: 2, rate: 0.7 })).unwrap();
    let h = build_system_hamiltonian(&net);
    let got = Lindbladian::new(&h, &ch).unwrap().superoperator();
    let expect = oracle_generator(&real_part(&h.to_dense()), &gammas, &hops, Some((2, 0.7)));
    assert!((got - expect).camax() <= 1e-14);
}

#[test]
fn channel_free_open_matches_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=7 {
        let net = generate_disordered_network::<f64>(
            n,
            &Topology::Complete,
            Distribution::Uniform { lo: -1.0, hi: 1.0 },
            Distribution::Normal { mean: 0.0, sd: 0.6 },
            rng.random(),
        )
        .unwrap();
        let h = build_system_hamiltonian(&net);
        let mut amps = DVector::from_fn(n, |_, _| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        amps /= cx(amps.norm(), 0.0);
        let psi = PureState::on_sites(amps).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let ch = ChannelSpec::coherent(&net);
        for method in [Method::DenseExpm, Method::KrylovExpm, Method::Rk4] {
            let cfg = IntegratorConfig::new(0.05, 5.0).with_snapshots(true);
            let unit = evolve_unitary(&h, &psi, &cfg.clone().with_method(if method == Method::Rk4 {
                Method::DenseExpm
            } else {
                method
            }))
            .unwrap();
            assert_conserved(&unit, &h);
            let open = evolve_open(&h, &ch, &rho, &cfg.with_method(method)).unwrap();
            assert_physical(&open, false);
            assert_eq!(unit.len(), open.len());
            for (u, o) in unit.records().iter().zip(open.records()) {
                assert_eq!(u.time, o.time);
                assert!(max_abs_diff(&u.populations, &o.populations) <= 1e-8, "n={n} {method} {:e}", max_abs_diff(&u.populations, &o.populations));
                assert!((u.coherence_l1 - o.coherence_l1).abs() <= 1e-8, "n={n} {method} {:e}", u.coherence_l1 - o.coherence_l1);
            }
        }
    }
}

#[test]
fn pure_dephasing_decays_coherence() {
    let gamma = 0.7;
    let net = SiteNetwork::new(vec![0.3, -0.2], vec![], None).unwrap();
    let h = build_system_hamiltonian(&net);
    let c = cx(0.3, 0.2);
    let rho0 = DensityMatrix::new(DMatrix::from_row_slice(2, 2, &[cx(0.5, 0.0), c, c.conj(), cx(0.5, 0.0)]))
        .unwrap();
    let ch = ChannelSpec::uniform_dephasing(&net, gamma).unwrap();
    for method in [Method::DenseExpm, Method::KrylovExpm, Method::Rk4] {
        let cfg = IntegratorConfig::new(0.05, 6.0).with_method(method).with_snapshots(true);
        let traj = evolve_open(&h, &ch, &rho0, &cfg).unwrap();
        assert_physical(&traj, false);
        for r in traj.records() {
            let expect = c.norm() * (-gamma * r.time).exp();
            let rho12 = density_snapshot(r)[(0, 1)].norm();
            assert!((rho12 - expect).abs() <= 1e-6, "{method} t={}", r.time);
            assert!((r.coherence_l1 - 2.0 * expect).abs() <= 2e-6);
            assert!((r.populations[0] - 0.5).abs() <= 1e-12);
        }
    }
}

#[test]
fn dephased_chain_relaxes_to_null_space() {
    for n in 2..=4 {
        let energies: Vec<f64> = (0..n).map(|i| 0.2 * i as f64).collect();
        let net = SiteNetwork::chain(energies, 1.0).unwrap();
        let h = build_system_hamiltonian(&net);
        let gammas = vec![0.8; n];
        let gen = oracle_generator(&real_part(&h.to_dense()), &gammas, &[], None);
        // null vector: right singular vector of the smallest singular value
        let svd = gen.svd(false, true);
        let k = svd.singular_values.imin();
        assert!(svd.singular_values[k] < 1e-10);
        let v = svd.v_t.unwrap().row(k).adjoint();
        let mut steady = DMatrix::from_column_slice(n, n, v.as_slice());
        let tr = steady.trace();
        steady /= tr;
        for i in 0..n {
            assert!((steady[(i, i)].re - 1.0 / n as f64).abs() < 1e-9);
        }

        let ch = ChannelSpec::uniform_dephasing(&net, 0.8).unwrap();
        let rho0 = DensityMatrix::localized(n, 0).unwrap();
        let cfg = IntegratorConfig::new(5.0, 400.0).with_method(Method::DenseExpm);
        let traj = evolve_open(&h, &ch, &rho0, &cfg).unwrap();
        for (p, s) in traj.last().populations.iter().zip(steady.diagonal().iter()) {
            assert!((p - 1.0 / n as f64).abs() <= 1e-6);
            assert!((p - s.re).abs() <= 1e-6);
        }
    }
}

fn final_density(traj: &Trajectory<f64>) -> DMatrix<C> {
    density_snapshot(traj.last()).clone()
}

#[test]
fn rk4_error_scales_with_fourth_power_of_step() {
    let net = SiteNetwork::chain(vec![0.0, 0.5, -0.3], 1.0).unwrap().with_sink(2, 0.4).unwrap();
    let h = build_system_hamiltonian(&net);
    let ch = ChannelSpec::uniform_dephasing(&net, 0.6).unwrap();
    let rho0 = DensityMatrix::localized(3, 0).unwrap();
    let run = |method, dt: f64, safety: f64| {
        let mut cfg = IntegratorConfig::new(dt, 2.0).with_method(method).with_snapshots(true);
        cfg.rk4_safety = safety;
        final_density(&evolve_open(&h, &ch, &rho0, &cfg).unwrap())
    };
    let reference = run(Method::DenseExpm, 2.0, 0.05);
    // one substep per step so the step is exactly dt
    let coarse = (run(Method::Rk4, 0.1, 1.0) - &reference).camax();
    let fine = (run(Method::Rk4, 0.05, 1.0) - &reference).camax();
    let ratio = coarse / fine;
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio} ({coarse:e} / {fine:e})");

    for method in [Method::DenseExpm, Method::KrylovExpm] {
        for dt in [0.2, 0.1] {
            assert!((run(method, dt, 0.05) - &reference).camax() <= 1e-10, "{method} dt={dt}");
        }
    }
}

#[test]
fn sink_runs_stay_physical() {
    let net = generate_disordered_network::<f64>(
        5,
        &Topology::Chain,
        Distribution::Uniform { lo: -2.0, hi: 2.0 },
        Distribution::Constant(1.0),
        3,
    )
    .unwrap()
    .with_sink(4, 0.5)
    .unwrap();
    let h = build_system_hamiltonian(&net);
    let ch = ChannelSpec::new(vec![0.05, 2.0, 0.3, 10.0, 0.0], vec![Hop::new(1, 3, 0.2)], net.sink()).unwrap();
    let rho0 = DensityMatrix::localized(5, 0).unwrap();
    for method in [Method::DenseExpm, Method::KrylovExpm, Method::Rk4] {
        let cfg = IntegratorConfig::new(0.1, 20.0).with_method(method).with_snapshots(true);
        let traj = evolve_open(&h, &ch, &rho0, &cfg).unwrap();
        assert_physical(&traj, true);
        assert!(traj.last().sink_captured > 0.1);
    }
}

#[test]
fn uncoupled_bath_leaves_site_populations_unchanged() {
    let net = SiteNetwork::chain(vec![0.4, 0.0, -0.4], 0.8).unwrap();
    let bath = BathSpec::uniform(3, vec![Mode::new(1.0, 2), Mode::new(2.3, 1)], 0.0).unwrap();
    let basis = ProductBasis::new(3, bath.cutoffs()).unwrap();
    let h_joint = build_total_hamiltonian(&net, &bath, &basis).unwrap();
    let h_sys = build_system_hamiltonian(&net);
    let cfg = IntegratorConfig::new(0.1, 8.0);
    let joint = evolve_unitary(&h_joint, &PureState::localized(&basis, 0).unwrap(), &cfg).unwrap();
    let bare_basis = ProductBasis::new(3, vec![]).unwrap();
    let bare = evolve_unitary(&h_sys, &PureState::localized(&bare_basis, 0).unwrap(), &cfg).unwrap();
    assert_conserved(&joint, &h_joint);
    for (a, b) in joint.records().iter().zip(bare.records()) {
        assert!(max_abs_diff(&a.populations, &b.populations) <= 1e-9);
    }
}

#[test]
fn coupled_bath_changes_dynamics() {
    let net = SiteNetwork::chain(vec![0.0, 0.0], 1.0).unwrap();
    let bath = BathSpec::new(vec![Mode::new(1.0, 6)], DMatrix::from_row_slice(2, 1, &[0.8, -0.8])).unwrap();
    let basis = ProductBasis::new(2, bath.cutoffs()).unwrap();
    let h = build_total_hamiltonian(&net, &bath, &basis).unwrap();
    let cfg = IntegratorConfig::new(0.05, 10.0);
    let traj = evolve_unitary(&h, &PureState::localized(&basis, 0).unwrap(), &cfg).unwrap();
    assert_conserved(&traj, &h);
    let rho = traj.last();
    assert!(rho.coherence_l1 < 0.99);
    let _ = coherence_l1::<f64>;
}

#[test]
fn f32_rabi() {
    let net = holstein_core::SiteNetworkF32::chain(vec![0.0, 0.0], 1.0).unwrap();
    let h = build_system_hamiltonian(&net);
    let t = std::f32::consts::FRAC_PI_2;
    let psi = holstein_core::PureStateF32::on_sites(DVector::from_vec(vec![
        nalgebra::Complex::new(1.0f32, 0.0),
        nalgebra::Complex::new(0.0, 0.0),
    ]))
    .unwrap();
    let traj = evolve_unitary(&h, &psi, &IntegratorConfig::new(t / 20.0, t)).unwrap();
    assert!((traj.last().populations[1] - 1.0).abs() < 1e-5);
}
