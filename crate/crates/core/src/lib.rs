//! Holstein-model exciton transport: site networks coupled to truncated
//! vibrational baths, closed and open evolution, transport observables,
//! discrete walks and state-storage estimates.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the scalar for common use.

pub mod dynamics;
pub mod error;
pub mod memory;
pub mod model;
pub mod operator;
pub mod scalar;
pub mod transport;
pub mod walks;

pub use dynamics::{
    evolve_open, evolve_unitary, ChannelSpec, DensityMatrix, Hop, IntegratorConfig, Method,
    PureState, QuantumState, Record, Trajectory,
};
pub use error::{Category, Error, Issue, Result};
pub use memory::{max_qubits, qubit_state_bits, MemoryModel};
pub use model::{BathSpec, Mode, ProductBasis, SiteNetwork};
pub use operator::OperatorMatrix;
pub use scalar::{Complex, Real};
pub use transport::{
    crossover_scan, sweep_dephasing, transfer_efficiency, CrossoverReport, CrossoverSetup,
    EfficiencyCurve, OpenScenario,
};
pub use walks::{classical_walk, quantum_walk, CoinSpec, WalkDistribution};

pub type SiteNetworkF64 = SiteNetwork<f64>;
pub type SiteNetworkF32 = SiteNetwork<f32>;
pub type BathSpecF64 = BathSpec<f64>;
pub type BathSpecF32 = BathSpec<f32>;
pub type OperatorF64 = OperatorMatrix<f64>;
pub type OperatorF32 = OperatorMatrix<f32>;
pub type PureStateF64 = PureState<f64>;
pub type PureStateF32 = PureState<f32>;
pub type DensityMatrixF64 = DensityMatrix<f64>;
pub type DensityMatrixF32 = DensityMatrix<f32>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type IntegratorConfigF64 = IntegratorConfig<f64>;
pub type IntegratorConfigF32 = IntegratorConfig<f32>;
