use alloc::string::String;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("field size {p}^{m} exceeds the supported cap of 2^20")]
    Overflow { p: u64, m: u32 },
    #[error("modulus is not a monic irreducible polynomial of the requested degree")]
    NotIrreducible,
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operands belong to different fields")]
    ContextMismatch,
    #[error("invalid field element: {0}")]
    InvalidElement(String),
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("matrix is not regular nilpotent")]
    NotRegularNilpotent,
    #[error("matrix is singular")]
    Singular,
    #[error("eigenvalue data does not match the matrix: {0}")]
    EigenvalueMismatch(String),
    #[error("enumeration budget exceeded: need {needed}, cap {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },
    #[error("no solution found ({})", if *.exhaustive { "exhaustive search, none exists" } else { "heuristic search gave up" })]
    NotFound { exhaustive: bool },
    #[error("no pair of solutions with distinct k-th powers exists ({})", if *.exhaustive { "exhaustive" } else { "heuristic" })]
    PairNotFound { exhaustive: bool },
    #[error("no special solution of X_1^k + ... + X_{n}^k = lambda ({})", if *.exhaustive { "exhaustive" } else { "heuristic" })]
    SpecialSolutionNotFound { n: usize, exhaustive: bool },
    #[error("construction requires characteristic different from 2")]
    CharTwo,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("matrix too large for this operation: {0}")]
    TooLarge(String),
    #[error("block {block} not decomposed: {reason}")]
    NotDecomposed { block: usize, reason: String },
    #[error("internal check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
