use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected} qubits, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("channel is not invertible{}: eigenvalue {eigenvalue:e} below threshold", gate.map(|g| format!(" (gate {g})")).unwrap_or_default())]
    SingularChannel { gate: Option<usize>, eigenvalue: f64 },

    #[error("boosted rate {target} is below the native rate {native}")]
    BoostBelowNative { native: f64, target: f64 },

    #[error("boost is not realisable by non-negative Pauli insertions (weight {0:e})")]
    NonPhysicalBoost(f64),

    #[error("{n_qubits} qubits exceeds the dense limit of {limit}")]
    TooLarge { n_qubits: usize, limit: usize },

    #[error("shadow set is empty")]
    EmptyShadow,

    #[error("not enough snapshots: need at least {needed}, have {have}")]
    NotEnoughSnapshots { needed: usize, have: usize },

    #[error("shadow set carries no per-gate recovery log")]
    MissingGateLog,

    #[error("symmetry projection is degenerate: denominator {value} ± {stderr}")]
    DegenerateProjection { value: f64, stderr: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("unsupported shadow file version {0:?}")]
    Version(String),

    #[error("shadow file checksum mismatch")]
    Checksum,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by numerics rather than by malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SingularChannel { .. }
                | Error::NonPhysicalBoost(_)
                | Error::DegenerateProjection { .. }
                | Error::DegenerateFit(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Checksum | Error::Version(_))
    }
}
