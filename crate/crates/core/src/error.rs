use thiserror::Error;

/// Errors produced by model construction and evaluation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("frame for variable `{0}` is empty")]
    EmptyFrame(String),
    #[error("frame for variable `{0}` repeats value `{1}`")]
    DuplicateFrameValue(String, String),
    #[error("variable `{0}` appears with conflicting frames")]
    FrameMismatch(String),
    #[error("scope mismatch: {0}")]
    ScopeMismatch(String),
    #[error("valuation kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown value `{value}` for variable `{variable}`")]
    UnknownValue { variable: String, value: String },
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("unknown calculus `{0}`")]
    UnknownCalculus(String),
    #[error("calculus `{0}` is already registered")]
    DuplicateCalculus(String),
    #[error("calculus bundle is missing its `{0}` function")]
    MissingFunction(&'static str),
    #[error("degenerate valuation: {0}")]
    DegenerateValuation(String),
    #[error("expected a single-variable scope, found `{0}`")]
    ScopeNotSingleton(String),
    #[error("oracle bound exceeded: {0}")]
    OracleBoundExceeded(String),
    #[error("no cluster contains hyperedge `{0}`")]
    NoContainingCluster(String),
    #[error("invalid valuation: {0}")]
    InvalidValuation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
