use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("domain mismatch between operands")]
    DomainMismatch,

    #[error("time grid mismatch between operands")]
    GridMismatch,

    #[error("grid size mismatch: expected {expected} samples, got {got}")]
    SampleCountMismatch { expected: usize, got: usize },

    #[error("invalid axis {0}, expected 0..3")]
    InvalidAxis(usize),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("fractional order {0} outside the admissible range {1}")]
    InvalidOrder(f64, &'static str),

    #[error("time gap must be positive, got {0}")]
    NonpositiveGap(f64),

    #[error("need at least {need} time nodes, got {got}")]
    TooFewTimeNodes { need: usize, got: usize },

    #[error("abel inversion requires f(0) = 0, got {0}")]
    NonzeroOrigin(f64),

    #[error("negative input value {value} at node {node}")]
    NegativeInput { node: usize, value: f64 },

    #[error("grid {0}^3 exceeds the direct-summation cap {1}^3")]
    GridTooLarge(usize, usize),

    #[error("initial data is not divergence-free: max coefficient {0:.3e}")]
    NotDivergenceFree(f64),

    #[error("Picard iteration did not converge after {iterations} iterations (last update {last_update:.3e}{})", if *.diverging { ", diverging" } else { "" })]
    NoConvergence {
        iterations: usize,
        last_update: f64,
        diverging: bool,
    },

    #[error("non-finite value encountered during iteration {0}")]
    NonFinite(usize),

    #[error("unknown manufactured family: {0}")]
    UnknownFamily(String),

    #[error("unknown verification identifier: {0}")]
    UnknownCheck(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("chain series too short to bracket t2: horizon must be split as [0,T] and (T,2T]")]
    ChainTooShort,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
