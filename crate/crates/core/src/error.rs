//! Error type shared by every module of the library.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("arity mismatch for {relation}: expected {expected}, found {found}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("repeated answer variable {0}")]
    RepeatedAnswerVariable(String),
    #[error("equality atom on quantified variable {0}")]
    EqualityOnQuantified(String),
    #[error("answer variable {0} does not occur in any relational atom")]
    UnboundAnswerVariable(String),
    #[error("no guard atom in TGD body")]
    NoGuard,
    #[error("head variable {0} is neither in the body nor existentially quantified")]
    UnboundHeadVariable(String),
    #[error("TGD head is empty")]
    EmptyHead,
    #[error("union query has no disjuncts")]
    EmptyUnion,
    #[error("disjuncts disagree on answer variables")]
    AnswerVariableMismatch,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("ontology is not full")]
    NotFull,
    #[error("constant {0} is not in the active domain")]
    UnknownConstant(String),
    #[error("duplicate interpolation nodes")]
    DuplicateNodes,
    #[error("oracle inconsistent: {0}")]
    OracleInconsistent(String),
    #[error("oracle failed: {0}")]
    Oracle(String),
    #[error("missing count for representative {0}")]
    MissingCount(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("database violates constraints: {0}")]
    ConstraintViolation(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by hitting a configured search cap.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}
