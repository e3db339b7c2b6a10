//! The segment, mark, convert and clean-up pipeline.

mod graphemes;
mod pipeline;
mod rules;

use thiserror::Error;

use crate::fsa::FsaError;

pub use graphemes::{GraphemeSet, MAX_GRAPHEME_LEN};
pub use pipeline::{build_g2p_rule, build_pipeline, build_segmenter, g2p_macros, Pipeline, Stages};
pub use rules::{parse_rule_file, parse_rule_file_with, ConversionRule, RuleFile, RuleGroup, DUTCH_RULES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum G2pError {
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("line {line}: unknown class `@{name}`")]
    UnknownClass { line: usize, name: String },
    #[error("line {line}: `{grapheme}` is not in the grapheme inventory")]
    UnknownGrapheme { line: usize, grapheme: String },
    #[error("line {line}: second default mapping for `{grapheme}`")]
    DuplicateDefault { line: usize, grapheme: String },
    #[error("invalid grapheme `{grapheme}`: {reason}")]
    InvalidGrapheme { grapheme: String, reason: &'static str },
    #[error("the grapheme inventory is empty")]
    EmptyGraphemeSet,
    #[error("`{word}`: no grapheme matches at position {position}")]
    Unsegmentable { word: String, position: usize },
    #[error("`{word}`: the rules produce {} outputs ({})", outputs.len(), outputs.join(", "))]
    NonFunctional { word: String, outputs: Vec<String> },
    #[error("`{word}` is rejected by the {stage} stage")]
    Rejected { word: String, stage: &'static str },
    #[error(transparent)]
    Fsa(#[from] FsaError),
}
