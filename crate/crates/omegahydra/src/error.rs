use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("not a collapsing node: no local stack")]
    NotACollapse,
    #[error("duplicate mu-symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("unknown mu-symbol {0:?}")]
    UnknownSymbol(String),
    #[error("mu-symbol {0:?} has no evaluator; value outside the computable fragment")]
    NoEvaluator(String),
    #[error("mu-symbol {sym:?} expects {expect} argument(s), got {got}")]
    BadArity { sym: String, expect: usize, got: usize },
    #[error("mu-evaluation result does not lie below its bound")]
    EvalOutOfRange,
    #[error("mu-evaluation needs an integer bound at desk scale")]
    NonIntegerBound,
    #[error("ill-formed tree: {0}")]
    IllFormed(String),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown mu-symbol name {0:?}")]
    UnknownMu(String),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ChopError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("the empty domain has no choices")]
    EmptyDomain,
    #[error("chop applied to a pure term node with no hydra classification")]
    NotAHydra,
    #[error("no chop case applies to this configuration: {0}")]
    NoCase(String),
    #[error("choice rejected: {0}")]
    BadChoice(String),
    #[error("exact enumeration infeasible: size bound {bound} exceeds the feasibility cap {cap}")]
    Infeasible { bound: u64, cap: u64 },
    #[error("battle precondition failed: {0}")]
    Precondition(String),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("literal is not closed")]
    OpenLiteral,
    #[error("no decision hook for relation {0:?}")]
    NoRelationHook(String),
    #[error("truth of {0} is not decidable at desk scale")]
    Undecidable(String),
    #[error("substitution target is not a variable")]
    NotAVariable,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("node path {0:?} does not occur in the proof")]
    DetachedNode(String),
    #[error("rule {rule} expects {expect} premise(s), got {got}")]
    BadArity { rule: String, expect: usize, got: usize },
    #[error("ordinal assignment missing at {0}")]
    MissingAssignment(String),
    #[error("ordinal derivation failed at {path}: {msg}")]
    Derivation { path: String, msg: String },
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Chop(#[from] ChopError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("initial validation failed: {0}")]
    InvalidInput(String),
    #[error("stuck at case {case}: {report}")]
    Stuck { case: String, report: String },
    #[error("step contract violated after {case}: {report}")]
    ContractViolation { case: String, report: String },
}
