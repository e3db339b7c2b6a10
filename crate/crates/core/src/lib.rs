//! Finite-state grapheme-to-phoneme conversion.
//!
//! A word is segmented into graphemes, bracketed with boundary markers,
//! rewritten by an ordered cascade of context-sensitive conversion rules and
//! stripped of markers. Every stage is a transducer built with the
//! regular-expression calculus in [`fsa`]; the cascade can be applied stage by
//! stage or composed into a single machine.
//!
//! On top of the rule-based system the crate aligns its output with gold
//! transcriptions ([`align`]) and learns correction rules with
//! transformation-based learning ([`tbl`]). [`eval`] holds the accuracy
//! metrics and the cross-validation harness, [`lexicon`] the lexicon file
//! format, and [`synth`] generates lexicons with known correction rules.

pub mod align;
pub mod eval;
pub mod fsa;
pub mod g2p;
pub mod lexicon;
pub mod synth;
pub mod tbl;
