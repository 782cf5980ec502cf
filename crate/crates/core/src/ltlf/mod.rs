//! LTLf: syntax, finite-trace semantics, progression and automata.

mod dfa;
mod formula;
mod parser;
mod progress;
mod symbolic;

use thiserror::Error;

use crate::dd::DdError;

pub use dfa::{to_dfa, to_dfa_with_cap, Dfa, DEFAULT_ATOM_CAP};
pub use formula::{Formula, Letter};
pub use parser::parse;
pub use progress::progress;
pub use symbolic::{bits_for, encode_symbolic, SymbolicDfa};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtlError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared atom `{atom}`; declared propositions: {}", declared.join(", "))]
    UndeclaredAtom { atom: String, declared: Vec<String> },
    #[error("formula has {count} atoms, above the cap of {cap}")]
    TooManyAtoms { count: usize, cap: usize },
    #[error("atom `{0}` has no labeling function")]
    UnencodedAtom(String),
    #[error("DFA needs {needed} state bits but only {available} are allocated")]
    NotEnoughBits { needed: usize, available: usize },
    #[error(transparent)]
    Dd(#[from] DdError),
}
