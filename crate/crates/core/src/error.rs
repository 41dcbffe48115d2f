use thiserror::Error;

use crate::search::SearchResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a prime")]
    InvalidPrime(u64),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("residue field of order {0} exceeds the enumeration guard")]
    FieldTooLarge(u128),
    #[error("zero divisor detected: {0}")]
    ZeroDivisorDetected(String),
    #[error("no uniformizer found: {0}")]
    UniformizerNotFound(String),
    #[error("element has negative valuation {0}")]
    NotIntegral(i64),
    #[error("polynomial is not normalized (content valuation {0})")]
    NotNormalized(i64),
    #[error("polynomial has no root in the field")]
    NoRootInField,
    #[error("branch depth exceeded {0}")]
    DepthExceeded(usize),
    #[error("oracle inconclusive: {0} residue classes uncertified")]
    Inconclusive(usize),
    #[error("specialization has a vanishing leading coefficient")]
    DegenerateSpecialization,
    #[error("subfield does not embed: {0}")]
    EmbeddingFailed(String),
    #[error("frontier exceeded {cap} live branches")]
    FrontierExplosion {
        cap: usize,
        partial: Box<SearchResult>,
    },
    #[error("global reconstruction needs the trivial subfield")]
    UnsupportedReconstruction,
    #[error("root-found branch failed re-verification: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
