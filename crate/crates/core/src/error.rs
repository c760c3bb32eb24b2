use thiserror::Error;

/// Syntax or name-resolution failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ground set of size {m} exceeds the bound {max}")]
    BoundExceeded { m: usize, max: usize },
    #[error("mismatched ground sets: {left} vs {right}")]
    MismatchedGround { left: usize, right: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("regime violation: {0}")]
    Regime(String),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("unrealizable state: {0}")]
    Unrealizable(String),
    #[error("threshold {given} is too small (need at least {needed})")]
    ThresholdTooSmall { given: u64, needed: u64 },
    #[error("relation is not a preorder: {0}")]
    NotPreorder(String),
    #[error("frame bound exceeded: {0}")]
    FrameBound(String),
    #[error("propositional variable p{0} is outside the valuation")]
    VariableOutOfRange(u32),
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("labeling does not verify: {0}")]
    UnverifiedLabeling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
