//! Post-processing of shadow sets.

mod budget;
mod export;
mod mom;
mod pauli;
mod purity;
mod symmetry;
mod zne;

pub use budget::{epsilon_bound, next_odd_at_least, sample_budget, shadow_norm_sq, SampleBudget};
pub use export::{write_estimates_csv, EstimateRow};
pub use mom::{median_of_means, mom_estimate, Estimate, MomConfig};
pub use pauli::{
    estimate_pauli, estimate_pauli_lightcone, factor_table, light_cone_norm, single_shot_values,
    single_shot_values_lightcone, PauliEvaluator,
};
pub use purity::{
    estimate_purity, estimate_purity_direct, estimate_purity_grouped, renyi_entropy, renyi_from_estimate,
    GROUPED_MAX_QUBITS,
};
pub use symmetry::{symmetry_verified_expectation, validate_symmetry_group};
pub use zne::{zne_extrapolate, ZneModel, ZnePoint, ZneResult};
