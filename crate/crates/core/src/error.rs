use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported field order {0}")]
    UnsupportedOrder(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{x} is not invertible modulo {n}")]
    NotInvertible { x: u64, n: u64 },
    #[error("modulus {n} is not coprime to characteristic {p}")]
    NotCoprime { n: u64, p: u64 },
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("not a pair of rank factorizations of the same matrix")]
    NotFactorizationPair,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("direction lies in the column space")]
    DirectionInColumnSpace,
    #[error("matrix is not of full rank")]
    NotFullRank,
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("subspace dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("identity check failed: {0}")]
    IdentityFailed(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("type labels disagree at matrix code {0}")]
    CanonicityViolation(u64),
    #[error("invalid clonoid coordinates: {0}")]
    InvalidCoords(String),
    #[error("malformed input: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
