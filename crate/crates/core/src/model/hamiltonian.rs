//! Builders for the three parts of the Holstein Hamiltonian
//! `H = H_p + H_vib + H_int` in the single-excitation manifold.

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;
use crate::scalar::{re, Real};

use super::{BathSpec, ProductBasis, SiteNetwork};

/// Largest joint dimension the total-Hamiltonian builder accepts by default.
pub const DEFAULT_MAX_DIM: usize = 1 << 20;

/// Tight-binding operator on the site space: `E_i` on the diagonal, `t_ij`
/// placed symmetrically for each declared pair.
pub fn build_system_hamiltonian<T: Real>(net: &SiteNetwork<T>) -> OperatorMatrix<T> {
    let diag = net
        .energies()
        .iter()
        .enumerate()
        .map(|(i, &e)| (i, i, re(e)));
    let hops = net
        .couplings()
        .iter()
        .flat_map(|c| [(c.i, c.j, re(c.amplitude)), (c.j, c.i, re(c.amplitude))]);
    OperatorMatrix::from_triplets(net.n_sites(), diag.chain(hops))
        .expect("network indices validated")
        .with_hermitian_flag(true)
}

fn check_bath_basis<T: Real>(bath: &BathSpec<T>, basis: &ProductBasis) -> Result<()> {
    if bath.cutoffs() != basis.cutoffs() {
        return Err(Error::invalid(
            "basis.cutoffs",
            format!(
                "basis cutoffs {:?} do not match bath cutoffs {:?}",
                basis.cutoffs(),
                bath.cutoffs()
            ),
        ));
    }
    Ok(())
}

fn check_dims<T: Real>(net: &SiteNetwork<T>, bath: &BathSpec<T>, basis: &ProductBasis) -> Result<()> {
    check_bath_basis(bath, basis)?;
    if net.n_sites() != basis.n_sites() || bath.n_sites() != net.n_sites() {
        return Err(Error::invalid(
            "basis.n_sites",
            format!(
                "network has {} sites, bath couplings {} rows, basis {} sites",
                net.n_sites(),
                bath.n_sites(),
                basis.n_sites()
            ),
        ));
    }
    Ok(())
}

/// `Σ_k ν_k n_k` on the diagonal, independent of the site label.
pub fn build_bath_hamiltonian<T: Real>(
    bath: &BathSpec<T>,
    basis: &ProductBasis,
) -> Result<OperatorMatrix<T>> {
    check_bath_basis(bath, basis)?;
    let diag: Vec<T> = (0..basis.total_dim())
        .map(|idx| {
            bath.modes().iter().enumerate().fold(T::zero(), |acc, (k, m)| {
                acc + m.frequency * T::from_usize_lossy(basis.occupation(idx, k))
            })
        })
        .collect();
    Ok(OperatorMatrix::from_diagonal(&diag))
}

/// `Σ_i Σ_k g_{i,k} P_i ⊗ (a_k + a_k†)` with truncated ladder operators.
pub fn build_interaction_hamiltonian<T: Real>(
    net: &SiteNetwork<T>,
    bath: &BathSpec<T>,
    basis: &ProductBasis,
) -> Result<OperatorMatrix<T>> {
    check_dims(net, bath, basis)?;
    let mut entries = Vec::new();
    for idx in 0..basis.total_dim() {
        let site = basis.site_of(idx);
        for (k, mode) in bath.modes().iter().enumerate() {
            let g = bath.coupling(site, k);
            if g == T::zero() {
                continue;
            }
            let n = basis.occupation(idx, k);
            if n < mode.fock_cutoff {
                // ⟨n+1| a† |n⟩ = √(n+1)
                let amp = g * T::from_usize_lossy(n + 1).sqrt();
                let up = idx + basis.stride(k);
                entries.push((up, idx, re(amp)));
                entries.push((idx, up, re(amp)));
            }
        }
    }
    Ok(OperatorMatrix::from_triplets(basis.total_dim(), entries)?.with_hermitian_flag(true))
}

/// `H_p ⊗ 𝟙_bath` on the product basis.
pub fn lift_system_operator<T: Real>(
    h_sys: &OperatorMatrix<T>,
    basis: &ProductBasis,
) -> Result<OperatorMatrix<T>> {
    if h_sys.dim() != basis.n_sites() {
        return Err(Error::invalid(
            "operator",
            format!("system operator dimension {} vs {} sites", h_sys.dim(), basis.n_sites()),
        ));
    }
    let bd = basis.bath_dim();
    let entries = h_sys
        .iter()
        .flat_map(|(i, j, v)| (0..bd).map(move |b| (i * bd + b, j * bd + b, v)));
    Ok(OperatorMatrix::from_triplets(basis.total_dim(), entries)?
        .with_hermitian_flag(h_sys.is_hermitian()))
}

/// `H = H_p ⊗ 𝟙 + 𝟙 ⊗ H_vib + H_int`, refusing joint dimensions above
/// [`DEFAULT_MAX_DIM`].
pub fn build_total_hamiltonian<T: Real>(
    net: &SiteNetwork<T>,
    bath: &BathSpec<T>,
    basis: &ProductBasis,
) -> Result<OperatorMatrix<T>> {
    build_total_hamiltonian_limited(net, bath, basis, DEFAULT_MAX_DIM)
}

pub fn build_total_hamiltonian_limited<T: Real>(
    net: &SiteNetwork<T>,
    bath: &BathSpec<T>,
    basis: &ProductBasis,
    max_dim: usize,
) -> Result<OperatorMatrix<T>> {
    if basis.total_dim() > max_dim {
        return Err(Error::Resource(format!(
            "joint dimension {} exceeds limit {max_dim}",
            basis.total_dim()
        )));
    }
    check_dims(net, bath, basis)?;
    let h_p = lift_system_operator(&build_system_hamiltonian(net), basis)?;
    let h_vib = build_bath_hamiltonian(bath, basis)?;
    let h_int = build_interaction_hamiltonian(net, bath, basis)?;
    h_p.add(&h_vib)?.add(&h_int)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coupling, Mode};
    use crate::scalar::c;
    use nalgebra::DMatrix;

    fn single_mode(n_sites: usize, nu: f64, cutoff: usize, g: f64) -> BathSpec<f64> {
        BathSpec::uniform(n_sites, vec![Mode::new(nu, cutoff)], g).unwrap()
    }

    #[test]
    fn single_site_system() {
        let net = SiteNetwork::new(vec![3.0], vec![], None).unwrap();
        let h = build_system_hamiltonian(&net);
        assert_eq!(h.to_dense(), DMatrix::from_element(1, 1, c(3.0, 0.0)));
    }

    #[test]
    fn seven_site_chain_is_tridiagonal() {
        let energies = vec![0.1, -0.3, 0.2, 0.0, 0.5, -0.1, 0.3];
        let net = SiteNetwork::chain(energies.clone(), 1.0).unwrap();
        let h = build_system_hamiltonian(&net);
        assert!(h.is_hermitian());
        assert_eq!(h.dim(), 7);
        for (i, &e) in energies.iter().enumerate() {
            for j in 0..7 {
                let v = h.get(i, j);
                match i.abs_diff(j) {
                    0 => assert_eq!(v.re, e),
                    1 => assert_eq!(v.re, 1.0),
                    _ => assert_eq!(v, c(0.0, 0.0)),
                }
            }
        }
    }

    #[test]
    fn bath_ladder_single_mode() {
        let bath = single_mode(1, 2.0, 2, 0.0);
        let basis = ProductBasis::new(1, bath.cutoffs()).unwrap();
        let d: Vec<f64> = build_bath_hamiltonian(&bath, &basis)
            .unwrap()
            .diagonal()
            .iter()
            .map(|z| z.re)
            .collect();
        assert_eq!(d, vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn bath_two_modes_codec_order() {
        let bath = BathSpec::new(
            vec![Mode::new(1.0, 1), Mode::new(3.0, 1)],
            DMatrix::zeros(1, 2),
        )
        .unwrap();
        let basis = ProductBasis::new(1, bath.cutoffs()).unwrap();
        let h = build_bath_hamiltonian(&bath, &basis).unwrap();
        // enumerate occupation vectors through the codec and sum ν·n directly
        let expect: Vec<f64> = (0..4)
            .map(|i| {
                let (_, occ) = basis.decode(i);
                occ[0] as f64 * 1.0 + occ[1] as f64 * 3.0
            })
            .collect();
        let got: Vec<f64> = h.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(got, expect);
        assert_eq!(got, vec![0.0, 3.0, 1.0, 4.0]);
    }

    #[test]
    fn bath_without_modes_is_zero() {
        let bath = BathSpec::<f64>::empty(3);
        let basis = ProductBasis::new(3, vec![]).unwrap();
        let h = build_bath_hamiltonian(&bath, &basis).unwrap();
        assert_eq!(h.dim(), 3);
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn bath_cutoff_mismatch() {
        let bath = single_mode(1, 1.0, 2, 0.0);
        let basis = ProductBasis::new(1, vec![3]).unwrap();
        assert!(build_bath_hamiltonian(&bath, &basis).is_err());
    }

    #[test]
    fn interaction_zero_coupling() {
        let net = SiteNetwork::chain(vec![0.0, 0.0], 1.0).unwrap();
        let bath = single_mode(2, 1.0, 3, 0.0);
        let basis = ProductBasis::new(2, bath.cutoffs()).unwrap();
        let h = build_interaction_hamiltonian(&net, &bath, &basis).unwrap();
        assert_eq!(h.nnz(), 0);
    }

    #[test]
    fn interaction_two_level_ladder() {
        let net = SiteNetwork::new(vec![0.0], vec![], None).unwrap();
        let bath = single_mode(1, 1.0, 1, 0.5);
        let basis = ProductBasis::new(1, bath.cutoffs()).unwrap();
        let h = build_interaction_hamiltonian(&net, &bath, &basis).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        assert_eq!(h.to_dense(), expect);
    }

    #[test]
    fn interaction_dimension_mismatch() {
        let net = SiteNetwork::new(vec![0.0, 1.0], vec![], None).unwrap();
        let bath = single_mode(1, 1.0, 1, 0.5);
        let basis = ProductBasis::new(1, bath.cutoffs()).unwrap();
        assert!(build_interaction_hamiltonian(&net, &bath, &basis).is_err());
    }

    #[test]
    fn total_is_sum_of_parts() {
        let net = SiteNetwork::new(
            vec![0.3, -0.2],
            vec![Coupling::new(0, 1, 0.7)],
            None,
        )
        .unwrap();
        let bath = BathSpec::new(
            vec![Mode::new(1.1, 2)],
            DMatrix::from_row_slice(2, 1, &[0.4, -0.25]),
        )
        .unwrap();
        let basis = ProductBasis::new(2, bath.cutoffs()).unwrap();
        let total = build_total_hamiltonian(&net, &bath, &basis).unwrap();
        assert_eq!(total.dim(), 6);
        assert!(total.is_hermitian());
        total.check_hermitian().unwrap();
        let parts = lift_system_operator(&build_system_hamiltonian(&net), &basis)
            .unwrap()
            .to_dense()
            + build_bath_hamiltonian(&bath, &basis).unwrap().to_dense()
            + build_interaction_hamiltonian(&net, &bath, &basis)
                .unwrap()
                .to_dense();
        assert_eq!(total.to_dense(), parts);
    }

    #[test]
    fn total_respects_dimension_limit() {
        let net = SiteNetwork::chain(vec![0.0; 4], 1.0).unwrap();
        let bath = single_mode(4, 1.0, 3, 0.1);
        let basis = ProductBasis::new(4, bath.cutoffs()).unwrap();
        let err = build_total_hamiltonian_limited(&net, &bath, &basis, 15).unwrap_err();
        assert_eq!(err.category(), crate::error::Category::Resource);
    }
}
