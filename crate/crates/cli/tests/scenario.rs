use holstein_cli::presets;
use holstein_cli::scenario::{
    parse_scenario, serialize_doc, IntegratorDoc, NetworkDoc, ScenarioDoc, SinkDoc, SCHEMA_VERSION,
};
use holstein_cli::spectral::{discretize_spectral_density, SpectralDensitySpec, SpectralFamily};
use holstein_core::model::build_system_hamiltonian;
use proptest::prelude::*;

#[test]
fn seven_site_preset_is_a_nearest_neighbour_chain() {
    let s = parse_scenario(presets::find("seven-site-chain").unwrap().text).unwrap();
    assert_eq!(s.network.n_sites(), 7);
    let h = build_system_hamiltonian(&s.network).to_dense();
    for i in 0..7 {
        for j in 0..7 {
            let nonzero = h[(i, j)].norm() > 0.0;
            if i.abs_diff(j) == 1 {
                assert!(nonzero, "missing bond {i}-{j}");
                assert_eq!(h[(i, j)].re, 1.0);
            } else if i != j {
                assert!(!nonzero, "unexpected bond {i}-{j}");
            }
        }
    }
}

#[test]
fn seven_site_placeholder_presets_share_the_chain_topology() {
    for name in ["fmo-like", "complex-i-like"] {
        let p = presets::find(name).unwrap();
        assert!(p.text.contains("PLACEHOLDER"), "{name} must label its values");
        let s = parse_scenario(p.text).unwrap();
        let bonds: Vec<(usize, usize)> = s.network.couplings().iter().map(|c| (c.i, c.j)).collect();
        assert_eq!(bonds, (0..6).map(|i| (i, i + 1)).collect::<Vec<_>>(), "{name}");
    }
}

#[test]
fn generator_presets_record_their_seeds() {
    let s = parse_scenario(presets::find("disordered-ring").unwrap().text).unwrap();
    assert_eq!(s.seeds(), vec![42]);
    let again = parse_scenario(presets::find("disordered-ring").unwrap().text).unwrap();
    assert_eq!(s.network.energies(), again.network.energies());
}

#[test]
fn sink_block_must_reference_a_site() {
    let text = presets::find("detuned-dimer").unwrap().text.replace("site = 1\nrate", "site = 9\nrate");
    let err = parse_scenario(&text).unwrap_err().to_string();
    assert!(err.contains("sink"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let text = presets::find("dimer").unwrap().text.replace("[initial]", "[initial]\nsitee = 1");
    assert!(parse_scenario(&text).is_err());
}

#[test]
fn bath_with_sink_is_rejected() {
    let text = presets::find("holstein-dimer")
        .unwrap()
        .text
        .replace("[bath.spectral]", "[network.sink]\nsite = 1\nrate = 1.0\n\n[bath.spectral]");
    let err = parse_scenario(&text).unwrap_err().to_string();
    assert!(err.contains("bath"), "{err}");
}

#[test]
fn bath_dimension_limit_is_checked_on_load() {
    let text = presets::find("holstein-dimer")
        .unwrap()
        .text
        .replace("[bath.spectral]", "[bath]\nmax_dim = 10\n\n[bath.spectral]");
    let err = parse_scenario(&text).unwrap_err().to_string();
    assert!(err.contains("exceeds"), "{err}");
}

fn doc(energies: Vec<f64>, t: f64, dt: f64, sink: Option<(usize, f64)>) -> ScenarioDoc {
    let n = energies.len();
    ScenarioDoc {
        schema_version: SCHEMA_VERSION,
        name: "generated".into(),
        description: None,
        network: NetworkDoc {
            energies: Some(energies),
            couplings: Some((0..n - 1).map(|i| (i, i + 1, t)).collect()),
            coordinates: None,
            generator: None,
            sink: sink.map(|(site, rate)| SinkDoc { site: site % n, rate }),
        },
        bath: None,
        channel: None,
        initial: None,
        integrator: IntegratorDoc {
            method: None,
            dt,
            t_final: Some(dt * 10.0),
            krylov_tol: None,
            krylov_max_dim: None,
            rk4_safety: None,
        },
        observables: None,
        output: None,
        sweep: None,
        crossover: None,
    }
}

proptest! {
    #[test]
    fn serializer_is_a_fixed_point(
        energies in prop::collection::vec(-5.0f64..5.0, 2..8),
        t in 0.01f64..3.0,
        dt in 0.001f64..1.0,
        sink in prop::option::of((0usize..8, 0.01f64..2.0)),
    ) {
        let d = doc(energies, t, dt, sink);
        let text = serialize_doc(&d);
        let parsed = parse_scenario(&text).unwrap();
        prop_assert_eq!(&parsed.doc, &d);
        prop_assert_eq!(parsed.serialize(), text.clone());
        let m = serialize_doc(&parsed.materialized(false).unwrap());
        let again = parse_scenario(&m).unwrap();
        prop_assert_eq!(serialize_doc(&again.materialized(false).unwrap()), m);
    }
}

/// `∫ η ω e^{−ω/ω_c} / ω dω` over `[lo, hi]`.
fn ohmic_reorganization(eta: f64, wc: f64, lo: f64, hi: f64) -> f64 {
    eta * wc * ((-lo / wc).exp() - (-hi / wc).exp())
}

#[test]
fn ohmic_reorganization_energy_converges() {
    let (eta, wc, band) = (0.3, 1.5, [0.05, 12.0]);
    let exact = ohmic_reorganization(eta, wc, band[0], band[1]);
    let mut last = f64::INFINITY;
    for k in [8, 16, 32, 64, 128, 256] {
        let spec = SpectralDensitySpec::from_family(
            SpectralFamily::OhmicExponentialCutoff { eta, cutoff: wc },
            band,
            k,
            1,
        );
        let bath = discretize_spectral_density(&spec, 1).unwrap();
        let rel = (bath.reorganization_energy(0) - exact).abs() / exact;
        assert!(rel < last, "K = {k}: error {rel} did not shrink from {last}");
        last = rel;
    }
    assert!(last < 0.01, "K = 256 relative error {last}");
}
