//! Open Ising spin chains with one thermal bath per site.
//!
//! Units: `ħ = k_B = h₁ = 1`. Basis states are indexed with site 1 as the most
//! significant bit and `↑ = 0`, so for two sites the order is `↑↑, ↑↓, ↓↑, ↓↓`.
//! Energy levels are numbered from the ground state upward.
//!
//! Everything is generic over the scalar type; the aliases below fix it to
//! `f64` (and `f32` for the model types).

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bath;
pub mod dynamics;
pub mod error;
pub mod generator;
pub mod grid;
pub mod model;
pub mod random;
pub mod scalar;
pub mod system;

pub use analysis::{
    compare_thermal_chemical, connectivity_blocks, count_structural_zeros, detailed_balance_audit,
    effective_blocks, locate_t_theta, predicted_zero_count, restricted_gibbs_prediction, sweep_coupling,
    sweep_temperature, zeros_scaling,
};
pub use bath::{bose_einstein, coupling_matrix_elements, ohmic_spectral_density, PauliAxis, SiteBath};
pub use dynamics::{
    excitation_probability, gibbs_state, propagate_density, propagate_populations, steady_states, Engine,
};
pub use error::{Error, Result};
pub use generator::{build_lindblad_superoperator, build_rate_matrix, GapPolicy};
pub use grid::{grid, Spacing};
pub use model::{build_hamiltonian, check_degeneracy, check_frustration, spectral_decomposition, Coupling};
pub use scalar::Real;

pub type ChainSpec = model::ChainSpec<f64>;
pub type BathConfig = bath::BathConfig<f64>;
pub type SpectralDecomposition = model::SpectralDecomposition<f64>;
pub type CouplingElements = bath::CouplingElements<f64>;
pub type RateMatrix = generator::RateMatrix<f64>;
pub type LindbladSuperoperator = generator::LindbladSuperoperator<f64>;
pub type PopulationState = dynamics::PopulationState<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type BlockPartition = analysis::BlockPartition<f64>;
pub type SweepResult = analysis::SweepResult<f64>;
pub type OpenChain = system::OpenChain<f64>;

pub type ChainSpecF32 = model::ChainSpec<f32>;
pub type BathConfigF32 = bath::BathConfig<f32>;
pub type RateMatrixF32 = generator::RateMatrix<f32>;
pub type OpenChainF32 = system::OpenChain<f32>;
