use thiserror::Error;

use crate::pbf::VarId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable {0} is not assigned")]
    Unassigned(VarId),

    #[error("variable name `{0}` is already registered")]
    DuplicateName(String),

    #[error("bus width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: i64 },

    #[error("monomial of degree {0} is already quadratic")]
    DegreeTooLow(usize),

    #[error("polynomial still has degree {0} after substitution")]
    NotQuadratic(usize),

    #[error("invalid network topology: {0}")]
    InvalidTopology(String),

    #[error("decoded value {value} at position {position} is outside 1..={n}")]
    Decode {
        position: usize,
        value: u64,
        n: usize,
    },

    #[error("enumeration over {vars} variables exceeds the cap of {cap}; use witness-based verification")]
    CapExceeded { vars: usize, cap: usize },

    #[error("input domain of {points} points exceeds the cap of {cap}")]
    DomainTooLarge { points: u128, cap: u128 },

    #[error("gadget {0} cannot be certified within the enumeration budget")]
    Uncertified(String),

    #[error("gadget {kind} failed its local certificate: {detail}")]
    CertificateFailed { kind: String, detail: String },

    #[error("variable `{0}` is not determined by the free inputs")]
    Underdetermined(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
