//! Transformation-based learning of phoneme-cell corrections.
//!
//! A rule rewrites the current phoneme cell of a grapheme (the segment) from
//! one value to another when its context conditions hold. Conditions look at
//! neighbouring phoneme cells or graphemes; positions outside the word read
//! as `#`. A rule pass is simultaneous: all matches are found on the layer
//! before the pass and rewritten together.

mod templates;
mod train;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use templates::{extended_templates, standard_templates, Template};
pub use train::{
    frequency_baseline, generate_candidates, score_rule, train, CandidateMode, LogEntry, TrainConfig, TrainMode,
    TrainOutput, TrainState,
};

/// Context value of positions outside the word.
pub const OUTSIDE: &str = "#";

/// A context condition of a template, with offsets relative to the segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cond {
    /// The phoneme cell at the offset.
    Phone(i8),
    /// The grapheme at the offset.
    Graph(i8),
    /// Some phoneme cell at an offset in `from..=to`.
    PhoneAny(i8, i8),
    /// Some grapheme at an offset in `from..=to`.
    GraphAny(i8, i8),
}

impl Cond {
    fn kind(self) -> &'static str {
        match self {
            Cond::Phone(_) => "p",
            Cond::Graph(_) => "g",
            Cond::PhoneAny(..) => "pany",
            Cond::GraphAny(..) => "gany",
        }
    }

    pub fn offsets(self) -> std::ops::RangeInclusive<i8> {
        match self {
            Cond::Phone(o) | Cond::Graph(o) => o..=o,
            Cond::PhoneAny(a, b) | Cond::GraphAny(a, b) => a..=b,
        }
    }

    pub fn on_graphemes(self) -> bool {
        matches!(self, Cond::Graph(_) | Cond::GraphAny(..))
    }

    /// Largest distance from the segment.
    pub fn reach(self) -> u8 {
        self.offsets().map(|o| o.unsigned_abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Cond::Phone(o) | Cond::Graph(o) => write!(f, "{}:{:+}", self.kind(), o),
            Cond::PhoneAny(a, b) | Cond::GraphAny(a, b) => write!(f, "{}:{:+},{:+}", self.kind(), a, b),
        }
    }
}

/// An instantiated transformation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TblRule {
    pub template: u32,
    pub from: String,
    pub to: String,
    /// The grapheme whose cell is rewritten.
    pub segment: String,
    /// One value per template condition.
    pub conds: Vec<(Cond, String)>,
    pub score: i64,
}

fn at(xs: &[String], i: usize, off: i8) -> &str {
    let j = i as isize + off as isize;
    if j < 0 || j as usize >= xs.len() {
        OUTSIDE
    } else {
        &xs[j as usize]
    }
}

impl TblRule {
    /// Whether the rule rewrites position `i` of a word with the given
    /// graphemes and current cells.
    pub fn matches(&self, graphemes: &[String], cells: &[String], i: usize) -> bool {
        if graphemes[i] != self.segment || cells[i] != self.from {
            return false;
        }
        self.conds.iter().all(|(c, v)| {
            let layer = if c.on_graphemes() { graphemes } else { cells };
            c.offsets().any(|o| at(layer, i, o) == v)
        })
    }

    /// One simultaneous pass over a word.
    pub fn apply(&self, graphemes: &[String], cells: &mut [String]) -> usize {
        let hits: Vec<usize> = (0..cells.len())
            .filter(|&i| self.matches(graphemes, cells, i))
            .collect();
        for &i in &hits {
            cells[i] = self.to.clone();
        }
        hits.len()
    }
}

/// Applies `rules` in order to one word's cells.
pub fn apply_rules(rules: &[TblRule], graphemes: &[String], cells: &[String]) -> Vec<String> {
    let mut out = cells.to_vec();
    for r in rules {
        r.apply(graphemes, &mut out);
    }
    out
}

fn escape(v: &str) -> String {
    if v.is_empty() {
        return "_".into();
    }
    let mut out = String::new();
    for c in v.chars() {
        if matches!(c, '\\' | '_' | ' ' | ':' | '-' | ',' | '\t') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Splits at the first unescaped `sep`, unescaping the left part.
fn take_value<'a>(s: &'a str, sep: &str) -> Result<(String, &'a str), RuleParseError> {
    let mut out = String::new();
    let mut escaped = false;
    let mut any_escape = false;
    for (i, c) in s.char_indices() {
        if escaped {
            out.push(c);
            escaped = false;
            continue;
        }
        if c == '\\' {
            escaped = true;
            any_escape = true;
            continue;
        }
        if !sep.is_empty() && s[i..].starts_with(sep) {
            return Ok((finish_value(out, any_escape), &s[i + sep.len()..]));
        }
        out.push(c);
    }
    if escaped {
        return Err(RuleParseError("dangling `\\`".into()));
    }
    if !sep.is_empty() {
        return Err(RuleParseError(format!("expected `{sep}`")));
    }
    Ok((finish_value(out, any_escape), ""))
}

fn finish_value(v: String, any_escape: bool) -> String {
    if v == "_" && !any_escape {
        String::new()
    } else {
        v
    }
}

impl fmt::Display for TblRule {
    /// `t=<id> <from>-><to> seg=<g> [cond=<kind>:<offset>:<value>]* score=<n>`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} {}->{} seg={}",
            self.template,
            escape(&self.from),
            escape(&self.to),
            escape(&self.segment)
        )?;
        for (c, v) in &self.conds {
            write!(f, " cond={}:{}", c, escape(v))?;
        }
        write!(f, " score={}", self.score)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct RuleParseError(String);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct RuleFileError {
    pub line: usize,
    pub message: String,
}

/// Splits at unescaped spaces, keeping escapes in place.
fn split_fields(line: &str) -> Result<Vec<String>, RuleParseError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                cur.push(c);
                cur.push(chars.next().ok_or_else(|| RuleParseError("dangling `\\`".into()))?);
            }
            ' ' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            _ => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

fn parse_offset(s: &str) -> Result<i8, RuleParseError> {
    s.parse::<i8>().map_err(|_| RuleParseError(format!("bad offset `{s}`")))
}

fn parse_cond(s: &str) -> Result<(Cond, String), RuleParseError> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| RuleParseError(format!("bad condition `{s}`")))?;
    let (offsets, value) = rest
        .split_once(':')
        .ok_or_else(|| RuleParseError(format!("bad condition `{s}`")))?;
    let (value, _) = take_value(value, "")?;
    let cond = match kind {
        "p" => Cond::Phone(parse_offset(offsets)?),
        "g" => Cond::Graph(parse_offset(offsets)?),
        "pany" | "gany" => {
            let (a, b) = offsets
                .split_once(',')
                .ok_or_else(|| RuleParseError(format!("bad offset range `{offsets}`")))?;
            let (a, b) = (parse_offset(a)?, parse_offset(b)?);
            if kind == "pany" {
                Cond::PhoneAny(a, b)
            } else {
                Cond::GraphAny(a, b)
            }
        }
        _ => return Err(RuleParseError(format!("unknown condition kind `{kind}`"))),
    };
    Ok((cond, value))
}

impl FromStr for TblRule {
    type Err = RuleParseError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields = split_fields(line)?;
        let mut fields = fields.iter().map(String::as_str);
        let mut next = |what: &str| fields.next().ok_or_else(|| RuleParseError(format!("missing {what}")));
        let template = next("template")?
            .strip_prefix("t=")
            .ok_or_else(|| RuleParseError("expected `t=<id>`".into()))?
            .parse::<u32>()
            .map_err(|_| RuleParseError("bad template id".into()))?;
        let (from, to) = take_value(next("mapping")?, "->")?;
        let (to, _) = take_value(to, "")?;
        let segment = next("segment")?
            .strip_prefix("seg=")
            .ok_or_else(|| RuleParseError("expected `seg=<grapheme>`".into()))?;
        let (segment, _) = take_value(segment, "")?;
        let mut conds = Vec::new();
        let mut score = None;
        for f in fields {
            if let Some(c) = f.strip_prefix("cond=") {
                if score.is_some() {
                    return Err(RuleParseError("condition after score".into()));
                }
                conds.push(parse_cond(c)?);
            } else if let Some(s) = f.strip_prefix("score=") {
                score = Some(s.parse::<i64>().map_err(|_| RuleParseError("bad score".into()))?);
            } else {
                return Err(RuleParseError(format!("unexpected field `{f}`")));
            }
        }
        if from == to {
            return Err(RuleParseError("rule maps a value to itself".into()));
        }
        Ok(TblRule {
            template,
            from,
            to,
            segment,
            conds,
            score: score.ok_or_else(|| RuleParseError("missing score".into()))?,
        })
    }
}

/// One rule per line; blank lines and `#` comment lines are skipped.
pub fn parse_rules(text: &str) -> Result<Vec<TblRule>, RuleFileError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            l.parse().map_err(|e: RuleParseError| RuleFileError {
                line: i + 1,
                message: e.0,
            })
        })
        .collect()
}

pub fn format_rules(rules: &[TblRule]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}
