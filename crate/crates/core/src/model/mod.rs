//! System, bath and interaction Hamiltonians of the Holstein model.
//!
//! The particle lives in the single-excitation manifold, so an `N`-site
//! network is an `N`-dimensional site basis. Bath modes are truncated Fock
//! spaces and the joint space is indexed by [`ProductBasis`].

mod basis;
mod bath;
mod disorder;
mod hamiltonian;
mod network;

pub use basis::ProductBasis;
pub use bath::{BathSpec, Mode};
pub use disorder::{generate_disordered_network, Distribution, Topology};
pub use hamiltonian::{
    build_bath_hamiltonian, build_interaction_hamiltonian, build_system_hamiltonian,
    build_total_hamiltonian, build_total_hamiltonian_limited, lift_system_operator,
    DEFAULT_MAX_DIM,
};
pub use network::{Coupling, Sink, SiteNetwork};
