use thiserror::Error;

use crate::operators::Family;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or out-of-range configuration.
    Config,
    /// Parameters are well-formed but violate an operator's admissibility
    /// constraint (condition pq([n]-1) > p^n (p-q)).
    Admissibility,
    /// A computation produced a non-finite value.
    Numeric,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter pair (p={p}, q={q}): require 0 < q <= p <= 1")]
    InvalidPair { p: f64, q: f64 },

    #[error("degree n={n} out of range for {family}: require {min} <= n <= {max}")]
    InvalidDegree {
        family: Family,
        n: usize,
        min: usize,
        max: usize,
    },

    #[error(
        "King condition pq([n]-1) > p^n (p-q) fails for n={n}, p={p}, q={q}: \
         lhs={lhs:e}, rhs={rhs:e}"
    )]
    KingCondition {
        n: usize,
        p: f64,
        q: f64,
        lhs: f64,
        rhs: f64,
    },

    #[error("expected a {expected} operator, got {got}")]
    WrongFamily { expected: Family, got: Family },

    #[error("argument x={0} outside [0,1]")]
    OutOfDomain(f64),

    #[error("binomial index k={k} exceeds n={n}")]
    BinomialIndex { n: usize, k: usize },

    #[error("moment order {0} is not supported (only 0, 1, 2)")]
    MomentOrder(u32),

    #[error("no closed-form moments available for {0}")]
    NoClosedForm(Family),

    #[error("delta must be positive and finite, got {0}")]
    NonPositiveDelta(f64),

    #[error("grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),

    #[error("function `{0}` carries no Lipschitz metadata")]
    MissingLipschitz(String),

    #[error("invalid Lipschitz metadata M={m}, rho={rho}: require M > 0, 0 < rho <= 1")]
    InvalidLipschitz { m: f64, rho: f64 },

    #[error("density prefix length must be positive")]
    EmptyPrefix,

    #[error("epsilon must be positive and finite, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("non-finite value {value} from `{what}` at x={x}")]
    NonFinite { what: String, x: f64, value: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::KingCondition { .. } => ErrorKind::Admissibility,
            Error::NonFinite { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Config,
        }
    }
}
