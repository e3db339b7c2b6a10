//! A small finite-state calculus: regular expressions over symbols compiled
//! into transducers, with composition, determinization, minimization and
//! leftmost longest-match replacement.

mod dfa;
mod fst;
mod ops;
mod oracle;
mod regex;
mod replace;

use thiserror::Error;

pub use dfa::determinize_minimize;
pub use fst::{label, symbol, Arc, Fst, Label, StateId, EPSILON};
pub use ops::{closure, compose, compose_all, concat, cross_product, ignore, optional, union};
pub use oracle::{oracle_replace, oracle_replace_spans, RegexMatcher};
pub use regex::{compile, Compiler, MacroDef, MacroEnv, Regex};
pub use replace::replace as replace_build;

/// Word-boundary marker inserted around a segmented word.
pub const BOUNDARY: char = '#';
/// Marks a grapheme that has not been converted yet.
pub const UNCONVERTED: char = '-';
/// Marks a grapheme that has been converted.
pub const CONVERTED: char = '+';

/// True for the three marker symbols, which never occur in word input.
pub fn is_marker(c: char) -> bool {
    matches!(c, BOUNDARY | UNCONVERTED | CONVERTED)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FsaError {
    #[error("unbound macro `{0}`")]
    UnboundMacro(String),
    #[error("macro `{name}` takes {expected} argument(s), got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("macro `{0}` is defined in terms of itself")]
    CyclicMacro(String),
    #[error("{0} must denote an acceptor")]
    NonAcceptor(&'static str),
    #[error("replacement target inserts unboundedly many symbols at one position")]
    UnboundedInsertion,
    #[error("arc target {0} is not a state")]
    InvalidState(StateId),
    #[error("automaton dump line {line}: {message}")]
    Dump { line: usize, message: String },
}
