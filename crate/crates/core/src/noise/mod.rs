//! Pauli noise channels, their quasiprobability inverses and noise boosting.

mod channel;
pub mod closed_form;
mod decomposition;
mod spec;

pub use channel::{
    biased_pauli_channel, boost_distribution, commutation_transform, insertion_channel,
    invert_pauli_channel, pauli_axes, pauli_index, pauli_label, rescale_channel, PauliChannel,
    QuasiChannel, SINGULAR_THRESHOLD,
};
pub use decomposition::{circuit_decomposition, decomposition_from_channels, QuasiDecomposition};
pub use spec::{GateNoise, NoiseModelKind, NoiseSpec};
