//! Classical shadows with probabilistic error cancellation.

pub mod circuit;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod lightcone;
pub mod noise;
pub mod pauli;
pub mod shadow;
pub mod sim;

pub use circuit::{Circuit, GateKind, GateOp};
pub use error::{Error, Result};
pub use pauli::{pauli_mul, pauli_weight, PauliAxis, PauliString, Phase};
