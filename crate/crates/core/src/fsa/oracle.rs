//! Reference semantics that do not go through automata: a backtracking
//! matcher for acceptor expressions and a direct string scan for
//! leftmost longest-match replacement.

use std::collections::{BTreeMap, BTreeSet};

use super::{FsaError, MacroEnv, Regex};

/// Matches acceptor expressions directly against a symbol sequence.
pub struct RegexMatcher<'a> {
    input: &'a [char],
}

impl<'a> RegexMatcher<'a> {
    pub fn new(input: &'a [char]) -> Self {
        RegexMatcher { input }
    }

    /// End positions `j` such that `input[start..j]` is in the language of `r`.
    pub fn ends(&self, r: &Regex, start: usize) -> Result<BTreeSet<usize>, FsaError> {
        self.ends_with(r, start, &[])
    }

    fn ends_with(&self, r: &Regex, start: usize, fill: &[&Regex]) -> Result<BTreeSet<usize>, FsaError> {
        Ok(match r {
            Regex::Empty => self.skip(BTreeSet::from([start]), fill)?,
            Regex::Symbol(c) => {
                let mut out = BTreeSet::new();
                for q in self.skip(BTreeSet::from([start]), fill)? {
                    if self.input.get(q) == Some(c) {
                        out.insert(q + 1);
                    }
                }
                self.skip(out, fill)?
            }
            Regex::Concat(xs) => {
                let mut cur = self.skip(BTreeSet::from([start]), fill)?;
                for x in xs {
                    let mut next = BTreeSet::new();
                    for p in cur {
                        next.extend(self.ends_with(x, p, fill)?);
                    }
                    cur = next;
                }
                cur
            }
            Regex::Union(xs) => {
                let mut out = BTreeSet::new();
                for x in xs {
                    out.extend(self.ends_with(x, start, fill)?);
                }
                out
            }
            Regex::Optional(a) => {
                let mut out = self.skip(BTreeSet::from([start]), fill)?;
                out.extend(self.ends_with(a, start, fill)?);
                out
            }
            Regex::Identity(a) => self.ends_with(a, start, fill)?,
            Regex::Ignore(a, b) => {
                let mut inner: Vec<&Regex> = fill.to_vec();
                inner.push(b);
                self.ends_with(a, start, &inner)?
            }
            Regex::Cross(..) | Regex::Compose(..) | Regex::Replace(..) => {
                return Err(FsaError::NonAcceptor("matched expression"))
            }
            Regex::Macro(name, _) => return Err(FsaError::UnboundMacro(name.clone())),
        })
    }

    /// Closes a position set under consuming strings of the fillers. A filler
    /// may itself contain strings of the fillers that enclose it.
    fn skip(&self, mut set: BTreeSet<usize>, fill: &[&Regex]) -> Result<BTreeSet<usize>, FsaError> {
        let mut todo: Vec<usize> = set.iter().copied().collect();
        while let Some(p) = todo.pop() {
            for (i, f) in fill.iter().enumerate() {
                for q in self.ends_with(f, p, &fill[..i])? {
                    if set.insert(q) {
                        todo.push(q);
                    }
                }
            }
        }
        Ok(set)
    }
}

/// Leftmost longest-match replacement by direct scanning.
///
/// Scans left to right; at each position the longest key of `targets`
/// occurring there, with the input before it ending in a string of `left`
/// and the input after it starting with a string of `right`, is replaced by
/// its value and the scan resumes after it. An empty key inserts its value
/// at most once per position. Other symbols are copied.
pub fn oracle_replace(
    targets: &BTreeMap<String, String>,
    left: &Regex,
    right: &Regex,
    input: &str,
) -> Result<String, FsaError> {
    oracle_replace_spans(targets, left, right, input, &MacroEnv::new()).map(|(s, _)| s)
}

/// As [`oracle_replace`], also returning the replaced input spans
/// `(start, end)` in symbol offsets.
pub fn oracle_replace_spans(
    targets: &BTreeMap<String, String>,
    left: &Regex,
    right: &Regex,
    input: &str,
    macros: &MacroEnv,
) -> Result<(String, Vec<(usize, usize)>), FsaError> {
    let left = macros.expand(left)?;
    let right = macros.expand(right)?;
    let s: Vec<char> = input.chars().collect();
    let m = RegexMatcher::new(&s);
    let mut keys: Vec<(Vec<char>, &String)> = targets.iter().map(|(k, v)| (k.chars().collect(), v)).collect();
    // longest first
    keys.sort_by_key(|k| std::cmp::Reverse(k.0.len()));

    let mut out = String::new();
    let mut spans = Vec::new();
    let mut i = 0;
    loop {
        let mut left_ok = false;
        for k in 0..=i {
            if m.ends(&left, k)?.contains(&i) {
                left_ok = true;
                break;
            }
        }
        let mut chosen = None;
        if left_ok {
            for (key, value) in &keys {
                let end = i + key.len();
                if end <= s.len() && s[i..end] == key[..] && !m.ends(&right, end)?.is_empty() {
                    chosen = Some((key.len(), *value));
                    break;
                }
            }
        }
        match chosen {
            Some((len, value)) if len > 0 => {
                out.push_str(value);
                spans.push((i, i + len));
                i += len;
                continue;
            }
            Some((_, value)) => {
                out.push_str(value);
                spans.push((i, i));
            }
            None => {}
        }
        if i == s.len() {
            break;
        }
        out.push(s[i]);
        i += 1;
    }
    Ok((out, spans))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn targets(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn longest_then_rest() {
        let t = targets(&[("aa", "X"), ("a", "Y")]);
        assert_eq!(oracle_replace(&t, &Regex::Empty, &Regex::Empty, "aaa").unwrap(), "XY");
    }

    #[test]
    fn empty_targets_copy() {
        let t = BTreeMap::new();
        assert_eq!(oracle_replace(&t, &Regex::Empty, &Regex::Empty, "abc").unwrap(), "abc");
    }

    #[test]
    fn no_match_copies() {
        let t = targets(&[("ng", "N")]);
        assert_eq!(oracle_replace(&t, &Regex::Empty, &Regex::Empty, "n").unwrap(), "n");
    }

    #[test]
    fn leftmost_before_longest() {
        let t = targets(&[("ab", "X")]);
        assert_eq!(oracle_replace(&t, &Regex::Empty, &Regex::Empty, "aab").unwrap(), "aX");
    }

    #[test]
    fn matcher_handles_ignore() {
        let s: Vec<char> = "a-+b".chars().collect();
        let m = RegexMatcher::new(&s);
        let r = Regex::ignore(Regex::string("ab"), Regex::symbols(['-', '+']));
        assert!(m.ends(&r, 0).unwrap().contains(&4));
    }
}
