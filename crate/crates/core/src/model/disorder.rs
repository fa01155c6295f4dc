//! Seeded generation of disordered networks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Coupling, SiteNetwork};

#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    /// Open nearest-neighbour chain; sites get integer coordinates.
    Chain,
    /// Periodic chain. Degenerates to a chain for fewer than three sites.
    Ring,
    /// All-to-all.
    Complete,
    Edges(Vec<(usize, usize)>),
}

impl Topology {
    fn edges(&self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Topology::Chain => (1..n).map(|i| (i - 1, i)).collect(),
            Topology::Ring => {
                let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
                if n > 2 {
                    e.push((n - 1, 0));
                }
                e
            }
            Topology::Complete => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
            Topology::Edges(e) => e.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Distribution {
    pub fn validate(&self, field: &str) -> Result<()> {
        let ok = match *self {
            Distribution::Constant(v) => v.is_finite(),
            Distribution::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Distribution::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(field, format!("invalid distribution bounds {self:?}")))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Distribution::Constant(v) => v,
            Distribution::Uniform { lo, hi } => rng.random_range(lo..hi),
            Distribution::Normal { mean, sd } => Normal::new(mean, sd)
                .expect("validated normal parameters")
                .sample(rng),
        }
    }
}

/// Draws on-site energies (in site order) and then one amplitude per edge (in
/// edge order) from a ChaCha8 stream seeded with `seed`.
pub fn generate_disordered_network<T: Real>(
    n_sites: usize,
    topology: &Topology,
    energies: Distribution,
    couplings: Distribution,
    seed: u64,
) -> Result<SiteNetwork<T>> {
    energies.validate("network.generator.energies")?;
    couplings.validate("network.generator.couplings")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e: Vec<T> = (0..n_sites)
        .map(|_| T::lit(energies.sample(&mut rng)))
        .collect();
    let cs = topology
        .edges(n_sites)
        .into_iter()
        .map(|(i, j)| Coupling::new(i, j, T::lit(couplings.sample(&mut rng))))
        .collect();
    let net = SiteNetwork::new(e, cs, None)?;
    if matches!(topology, Topology::Chain) {
        net.with_coordinates((0..n_sites).map(T::from_usize_lossy).collect())
    } else {
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_distributions_ignore_seed() {
        let a: SiteNetwork<f64> = generate_disordered_network(
            5,
            &Topology::Chain,
            Distribution::Constant(0.5),
            Distribution::Constant(1.0),
            1,
        )
        .unwrap();
        let b: SiteNetwork<f64> = generate_disordered_network(
            5,
            &Topology::Chain,
            Distribution::Constant(0.5),
            Distribution::Constant(1.0),
            999,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a, SiteNetwork::chain(vec![0.5; 5], 1.0).unwrap());
    }

    #[test]
    fn same_seed_same_network() {
        let gen = |seed| {
            generate_disordered_network::<f64>(
                7,
                &Topology::Complete,
                Distribution::Uniform { lo: -1.0, hi: 1.0 },
                Distribution::Normal { mean: 1.0, sd: 0.2 },
                seed,
            )
            .unwrap()
        };
        let (a, b) = (gen(42), gen(42));
        let bits = |n: &SiteNetwork<f64>| {
            n.energies()
                .iter()
                .map(|x| x.to_bits())
                .chain(n.couplings().iter().map(|c| c.amplitude.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&gen(43)));
        assert_eq!(a.couplings().len(), 21);
    }

    #[test]
    fn uniform_energies_are_centred() {
        let net: SiteNetwork<f64> = generate_disordered_network(
            10_000,
            &Topology::Edges(vec![]),
            Distribution::Uniform { lo: -1.0, hi: 1.0 },
            Distribution::Constant(0.0),
            7,
        )
        .unwrap();
        let n = net.n_sites() as f64;
        let mean = net.energies().iter().sum::<f64>() / n;
        // uniform(-1,1) has variance 1/3
        let sigma_mean = (1.0 / 3.0 / n).sqrt();
        assert!(mean.abs() < 3.0 * sigma_mean, "mean {mean}");
        assert!(net.energies().iter().all(|e| (-1.0..1.0).contains(e)));
    }

    #[test]
    fn invalid_bounds_rejected() {
        for d in [
            Distribution::Uniform { lo: 1.0, hi: 1.0 },
            Distribution::Uniform { lo: 2.0, hi: 1.0 },
            Distribution::Normal { mean: 0.0, sd: -1.0 },
            Distribution::Constant(f64::NAN),
        ] {
            let r = generate_disordered_network::<f64>(
                3,
                &Topology::Chain,
                d,
                Distribution::Constant(1.0),
                0,
            );
            assert!(r.is_err(), "{d:?}");
        }
    }

    #[test]
    fn ring_and_small_topologies() {
        let ring = |n| {
            generate_disordered_network::<f64>(
                n,
                &Topology::Ring,
                Distribution::Constant(0.0),
                Distribution::Constant(1.0),
                0,
            )
            .unwrap()
            .couplings()
            .len()
        };
        assert_eq!(ring(1), 0);
        assert_eq!(ring(2), 1);
        assert_eq!(ring(5), 5);
    }
}
