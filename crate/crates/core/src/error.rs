use thiserror::Error;

use crate::basis::BasisIndex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("basis string width mismatch: expected {expected} qubits, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("basis string {0} lies outside the support of the amplitude oracle")]
    OffSupport(BasisIndex),

    #[error("numeric range exceeded: {0}")]
    NumericRange(String),

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("expected a real-valued input: {0}")]
    NotReal(String),

    #[error("dense size cap exceeded: dimension {dim} > {cap}")]
    SizeCap { dim: usize, cap: usize },

    #[error("generator contract violated at {state}: {detail}")]
    ContractViolation { state: BasisIndex, detail: String },

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
