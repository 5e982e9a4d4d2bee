//! Statevector trajectories and the dense density-matrix oracle.

mod density;
pub mod kernels;
mod state;
mod trajectory;

pub use density::{
    exact_density, exact_density_with_channels, exact_expectation, exact_subsystem_purity,
    exact_symmetry_verified, paulis_on, DensityMatrix, RecoveryPolicy, DENSITY_LIMIT,
};
pub use state::{measure_in_bases, StateVector, STATEVECTOR_LIMIT};
pub use trajectory::{gate_pauli_masks, run_trajectory, run_trajectory_with_spec, sample_index};
