use thiserror::Error;

use crate::algebra::AssumptionReport;
use crate::pressure::PressureCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("not a probability vector: {0}")]
    NotProbability(String),

    #[error("column {column} sums to {sum}, expected 1")]
    NotStochastic { column: usize, sum: f64 },

    #[error("entry ({row}, {col}) = {value} must be a finite nonnegative number")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("assumption (A) violated: {0}")]
    AssumptionViolated(AssumptionReport),

    #[error("d must exceed 1 (got {0})")]
    InvalidBranching(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("power iteration did not converge after {iterations} iterations; spectral radius in [{lower}, {upper}]")]
    NoConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("no symbol of the alphabet lies on a cycle of the support graph")]
    EmptyRecurrentSet,

    #[error("depth cap {cap} reached before target width; best enclosure has width {}", best.width())]
    CertificateCap {
        cap: usize,
        best: Box<PressureCertificate>,
    },

    #[error("transition {step} puts mass on ({row}, {col}) where E vanishes")]
    SupportViolation { step: usize, row: usize, col: usize },

    #[error("{what} requires {required:e}, above the guard of {guard:e}")]
    GuardExceeded {
        what: &'static str,
        required: f64,
        guard: f64,
    },

    #[error("block is not admissible at level {level}, node {node}")]
    Inadmissible { level: usize, node: usize },

    #[error("partition function overflows f64; use the log-space variant")]
    Overflow,

    #[error("Parry measure undefined: {0}")]
    ParryUndefined(String),

    #[error("bracket violated: lower approximant at k = {k} ({lower}) exceeds upper approximant at n = {n} ({upper})")]
    BracketViolation {
        k: usize,
        lower: f64,
        n: usize,
        upper: f64,
    },

    #[error("empty result")]
    EmptyResult,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
