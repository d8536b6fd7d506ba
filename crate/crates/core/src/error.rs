use std::fmt;

use thiserror::Error;

/// Why a requested tester cannot be built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnconstructibleReason {
    QTooSmall,
    ROutOfRange,
    InsufficientIrreducibles,
    EpsVectorInvalid,
    FinalStepInfeasible,
    BelowDensityLimit,
    NoRoute,
}

impl fmt::Display for UnconstructibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::QTooSmall => "q_too_small",
            Self::ROutOfRange => "r_out_of_range",
            Self::InsufficientIrreducibles => "insufficient_irreducibles",
            Self::EpsVectorInvalid => "eps_vector_invalid",
            Self::FinalStepInfeasible => "final_step_infeasible",
            Self::BelowDensityLimit => "below_density_limit",
            Self::NoRoute => "no_route",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus is not irreducible over its coefficient level")]
    NotIrreducible,
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: String, found: String },
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: String, bound: String },
    #[error("scan exhausted: {0}")]
    Exhausted(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("invalid epsilon: {0}")]
    InvalidEpsilon(String),
    #[error("class mismatch: {0}")]
    ClassMismatch(String),
    #[error("malformed input at offset {offset}: {reason}")]
    MalformedInput { offset: usize, reason: String },
    #[error("unconstructible ({reason}): {detail}")]
    Unconstructible { reason: UnconstructibleReason, detail: String },
    #[error("search exhausted after {tried} candidate families: {detail}")]
    SearchExhausted { tried: u64, detail: String },
    #[error("work {work} exceeds exact-mode budget {budget}")]
    BudgetExceeded { work: u128, budget: u128 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid epsilon vector: {0}")]
    InvalidEpsVector(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn level_mismatch(expected: impl fmt::Display, found: impl fmt::Display) -> Self {
        Error::LevelMismatch { expected: expected.to_string(), found: found.to_string() }
    }

    pub(crate) fn out_of_range(index: impl fmt::Display, bound: impl fmt::Display) -> Self {
        Error::IndexOutOfRange { index: index.to_string(), bound: bound.to_string() }
    }

    pub(crate) fn unconstructible(reason: UnconstructibleReason, detail: impl Into<String>) -> Self {
        Error::Unconstructible { reason, detail: detail.into() }
    }
}
