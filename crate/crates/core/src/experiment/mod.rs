//! Hamiltonians, ansatz circuits and the experiment pipelines.

mod ansatz;
mod config;
mod hamiltonian;
mod run;

pub use ansatz::{
    build_hva_ansatz, find_fixture, fixtures, hva_param_count, optimize_hva, AnsatzFixture, OptimizerOptions,
};
pub use config::{ExperimentConfig, ExperimentKind, NoiseConfig};
pub use hamiltonian::{build_hamiltonian, Hamiltonian, HamiltonianKind, HamiltonianSpec, GROUND_ENERGY_LIMIT};
pub use run::{
    all_local_paulis, derive_seed, draw_noise, energy_convergence, energy_values, entropy_map, local_paulis,
    prepare, resample_errors, rescale_to_xi, run_experiment, run_rows, write_rows_csv, zne_trial,
    ConvergencePoint, EnergyConvergence, ExperimentOutput, ExperimentSetup, PurityEntry, ResampleStats,
    ResultRow, ZneTrial, VERSION,
};
