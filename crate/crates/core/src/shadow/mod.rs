//! Shadow sampling, snapshot reconstruction and the shadow file format.

mod factor;
pub mod io;
mod readout;
mod sampler;
mod set;

pub use factor::{
    overlap_pair_factor, pair_matrix, qubit_table, snapshot_factor, FactorTable, QubitTable,
    UNIFORM_BASIS_PROBS,
};
pub use io::{read_shadow, write_shadow, ShadowReader, ShadowWriter};
pub use readout::ReadoutModel;
pub use sampler::{
    sample_boosted_snapshot, sample_conventional_snapshot, sample_pec_snapshot, SamplerOptions,
    ShadowSampler,
};
pub use set::{ShadowHeader, ShadowMode, ShadowSet, Snapshot, FORMAT_VERSION};
