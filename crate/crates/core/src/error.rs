use thiserror::Error;

use crate::modular::VerificationReport;
use crate::witness::ApWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("p = {0} is not an odd prime")]
    InvalidPrime(u64),

    #[error("generator set is not {p}-free: {witness}")]
    NotPFree { p: u32, witness: ApWitness },

    #[error("requested {requested} terms but the generator set already has {generators}")]
    CountTooSmall { requested: usize, generators: usize },

    #[error("residue {residue} is outside 0..{modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },

    #[error("modulus must be at least 1")]
    ZeroModulus,

    #[error("a modular set must contain 0")]
    MissingZero,

    #[error("empty set")]
    EmptySet,

    #[error("terms must be strictly increasing ({previous} then {next})")]
    NotIncreasing { previous: u64, next: u64 },

    #[error("not a modular set modulo {modulus}: {reason}")]
    NotModular { modulus: u64, reason: String, report: Box<VerificationReport> },

    #[error("gcd({alpha}, {modulus}) != 1")]
    NotCoprime { alpha: u64, modulus: u64 },

    #[error("operands use different primes ({0} and {1})")]
    MixedPrime(u32, u32),

    #[error("sequence is not independent within {horizon} terms")]
    NotIndependent { horizon: usize },

    #[error("horizon too small: {have} terms, need at least {need}")]
    HorizonTooSmall { have: usize, need: usize },

    #[error("c = {c} outside the admissible range {low}..={high}")]
    ShiftOutOfRange { c: u64, low: i64, high: i64 },

    #[error("construction contradicts the theorem it implements: {0}")]
    TheoremContradiction(String),

    #[error("digit vectors {first:?} and {second:?} both sum to {value}")]
    SumCollision { value: u64, first: Vec<u32>, second: Vec<u32> },

    #[error("basis fails the validity hypotheses at index {index}: {reason}")]
    InvalidBasis { index: usize, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),

    #[error("{0} is only defined for p = 3")]
    Unsupported(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
