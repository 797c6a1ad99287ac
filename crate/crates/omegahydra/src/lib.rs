//! Ordinal notations with collapsing constructors, the hydra battles they
//! drive, and a sequent-calculus proof auditor with ordinal assignments,
//! an embedding pipeline, and a proof-rewriting engine whose steps track
//! chops on the assigned ordinal.

pub mod chop;
pub mod cli;
pub mod cmp;
pub mod embed;
pub mod error;
pub mod logic;
pub mod parse;
pub mod proof;
pub mod reduce;
pub mod term;

pub use chop::{battle, chop, domain, is_well_behaved, Choice, DomainKind, GameTrace};
pub use cmp::{compare, hull_member, natural_sum};
pub use error::{ChopError, LogicError, ParseError, ProofError, ReduceError, TermError};
pub use parse::{parse_term, print_term};
pub use term::{classify, size, F0Registry, FnSignature, HydraTerm};
