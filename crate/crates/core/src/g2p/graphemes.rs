use std::collections::{BTreeSet, HashSet};

use super::G2pError;
use crate::fsa::is_marker;

/// Longest grapheme accepted by the inventory format.
pub const MAX_GRAPHEME_LEN: usize = 4;

/// The ordered grapheme inventory used for segmentation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphemeSet {
    entries: Vec<String>,
    lookup: HashSet<String>,
}

impl GraphemeSet {
    /// Validates and wraps `entries`.
    ///
    /// Entries must be unique, one to four characters long and free of marker
    /// symbols, and every character of a multi-character entry must itself
    /// be an entry (so any string over the inventory's characters segments).
    pub fn new<I, S>(entries: I) -> Result<Self, G2pError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = GraphemeSet::default();
        for e in entries {
            let e: String = e.into();
            let n = e.chars().count();
            if n == 0 || n > MAX_GRAPHEME_LEN {
                return Err(G2pError::InvalidGrapheme {
                    grapheme: e,
                    reason: "graphemes have 1 to 4 characters",
                });
            }
            if e.chars().any(|c| is_marker(c) || c.is_whitespace()) {
                return Err(G2pError::InvalidGrapheme {
                    grapheme: e,
                    reason: "graphemes cannot contain markers or whitespace",
                });
            }
            if !set.lookup.insert(e.clone()) {
                return Err(G2pError::InvalidGrapheme {
                    grapheme: e,
                    reason: "duplicate grapheme",
                });
            }
            set.entries.push(e);
        }
        for e in &set.entries {
            if e.chars().count() > 1 {
                if let Some(c) = e.chars().find(|c| !set.lookup.contains(&c.to_string())) {
                    return Err(G2pError::InvalidGrapheme {
                        grapheme: e.clone(),
                        reason: if c.is_alphabetic() {
                            "every character of a grapheme must itself be a grapheme"
                        } else {
                            "grapheme uses a character outside the inventory"
                        },
                    });
                }
            }
        }
        Ok(set)
    }

    /// Parses the grapheme file format: one grapheme per line, `#` starts a
    /// comment line, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, G2pError> {
        let entries = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect::<Vec<_>>();
        GraphemeSet::new(entries)
    }

    /// The shipped Dutch inventory.
    pub fn dutch() -> Self {
        GraphemeSet::parse(include_str!("../../data/dutch.graphemes")).expect("shipped inventory is valid")
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, g: &str) -> bool {
        self.lookup.contains(g)
    }

    /// Every character used by some grapheme.
    pub fn chars(&self) -> BTreeSet<char> {
        self.entries.iter().flat_map(|e| e.chars()).collect()
    }

    /// Greedy longest-prefix tokenization. On failure returns the character
    /// offset at which no grapheme matches.
    pub fn tokenize<'w>(&self, word: &'w str) -> Result<Vec<&'w str>, usize> {
        let mut out = Vec::new();
        let bounds: Vec<usize> = word.char_indices().map(|(i, _)| i).chain([word.len()]).collect();
        let mut pos = 0;
        while pos + 1 < bounds.len() {
            let longest = (1..=MAX_GRAPHEME_LEN)
                .rev()
                .filter(|&n| pos + n < bounds.len())
                .find(|&n| self.lookup.contains(&word[bounds[pos]..bounds[pos + n]]));
            match longest {
                Some(n) => {
                    out.push(&word[bounds[pos]..bounds[pos + n]]);
                    pos += n;
                }
                None => return Err(pos),
            }
        }
        Ok(out)
    }
}
