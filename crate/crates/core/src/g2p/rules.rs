//! The conversion-rule language.
//!
//! One directive per line; lines whose first non-blank character is `#` are
//! comments.
//!
//! ```text
//! graphemes a aa aai b ...          extend the grapheme inventory
//! class cons = b c d f g ...        named set of strings, used as @cons
//! group short_vowel                 label for the rules that follow
//! rule e,u -> e j } / _ m           context-sensitive rule
//! rule a -> A ; o -> O / _ @cons {@cons,#}
//! default a a -> a                  context-free default mapping
//! ```
//!
//! In a mapping `G -> P` both sides are symbol sequences: tokens separated by
//! blanks or commas are concatenated, `[]` is the empty sequence and quoted
//! tokens (`'}'`) are taken literally. Several mappings share one context
//! when separated by `;`.
//!
//! A context is written `/ LEFT _ RIGHT`. Inside contexts `{x,y}` is a
//! disjunction, `[x,y]` a sequence, `^` makes the preceding item optional,
//! `@name` refers to a class, `#` is the word boundary and a bare `@` is the
//! schwa symbol. Braces are literal in mappings but must be quoted in
//! contexts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{G2pError, GraphemeSet};
use crate::fsa::{is_marker, Regex, BOUNDARY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleGroup {
    SpecialVowel,
    ShortVowel,
    SpecialConsonant,
    Default,
}

impl RuleGroup {
    pub fn name(self) -> &'static str {
        match self {
            RuleGroup::SpecialVowel => "special_vowel",
            RuleGroup::ShortVowel => "short_vowel",
            RuleGroup::SpecialConsonant => "special_consonant",
            RuleGroup::Default => "default",
        }
    }

    fn from_name(s: &str) -> Option<RuleGroup> {
        [
            RuleGroup::SpecialVowel,
            RuleGroup::ShortVowel,
            RuleGroup::SpecialConsonant,
            RuleGroup::Default,
        ]
        .into_iter()
        .find(|g| g.name() == s)
    }
}

impl fmt::Display for RuleGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One `g2p` rule: grapheme-to-phoneme mappings applied under a shared
/// context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionRule {
    pub targets: Vec<(String, String)>,
    pub left: Regex,
    pub right: Regex,
    pub group: RuleGroup,
    /// 1-based source line, 0 for rules built in code.
    pub line: usize,
}

impl ConversionRule {
    /// A context-free default mapping.
    pub fn default_mapping(grapheme: &str, phonemes: &str) -> Self {
        ConversionRule {
            targets: vec![(grapheme.to_string(), phonemes.to_string())],
            left: Regex::Empty,
            right: Regex::Empty,
            group: RuleGroup::Default,
            line: 0,
        }
    }

    pub fn is_context_free(&self) -> bool {
        self.left == Regex::Empty && self.right == Regex::Empty
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleFile {
    pub graphemes: GraphemeSet,
    pub classes: BTreeMap<String, Vec<String>>,
    /// Application order: earlier rules apply first.
    pub rules: Vec<ConversionRule>,
}

/// Source text of the shipped Dutch rule file.
pub const DUTCH_RULES: &str = include_str!("../../data/dutch.rules");

impl RuleFile {
    /// The shipped Dutch rules with the shipped grapheme inventory.
    pub fn dutch() -> Self {
        parse_rule_file_with(DUTCH_RULES, Some(&GraphemeSet::dutch())).expect("shipped rule file is valid")
    }

    /// Symbols that can occur anywhere in the pipeline: grapheme characters,
    /// phonemes, context and class symbols.
    pub fn symbols(&self) -> BTreeSet<char> {
        let mut out = self.graphemes.chars();
        for r in &self.rules {
            for (g, p) in &r.targets {
                out.extend(g.chars());
                out.extend(p.chars());
            }
            out.extend(r.left.symbols_used());
            out.extend(r.right.symbols_used());
        }
        for members in self.classes.values() {
            for m in members {
                out.extend(m.chars());
            }
        }
        out
    }
}

/// Parses a rule file whose grapheme inventory comes from its own
/// `graphemes` lines. Without such lines the inventory is the set of
/// rule-target graphemes plus their characters, and target graphemes are not
/// checked.
pub fn parse_rule_file(text: &str) -> Result<RuleFile, G2pError> {
    parse_rule_file_with(text, None)
}

/// Parses a rule file, validating targets against `graphemes` (merged with
/// any `graphemes` lines in the file).
pub fn parse_rule_file_with(text: &str, graphemes: Option<&GraphemeSet>) -> Result<RuleFile, G2pError> {
    let mut declared: Vec<String> = graphemes.map(|g| g.entries().to_vec()).unwrap_or_default();
    let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut body: Vec<(usize, &str, &str)> = Vec::new();

    // first pass: inventory and classes, so rules may refer to later classes
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - trimmed.len();
        let (kw, rest) = split_keyword(trimmed);
        let rest_col = col_of(raw, indent + kw.len());
        match kw {
            "graphemes" => {
                for tok in lex(rest, rest_col, line, Mode::Target)? {
                    match tok.kind {
                        Tok::Lit(s) => {
                            if !declared.contains(&s) {
                                declared.push(s)
                            }
                        }
                        _ => return Err(syntax(line, tok.col, "expected grapheme")),
                    }
                }
            }
            "class" => {
                let (name, members) = parse_class(rest, rest_col, line)?;
                classes.insert(name, members);
            }
            "rule" | "default" | "group" => body.push((line, kw, rest)),
            other => {
                return Err(syntax(
                    line,
                    col_of(raw, indent),
                    &format!("unknown directive `{other}`"),
                ))
            }
        }
    }

    let mut group = RuleGroup::SpecialVowel;
    let mut rules = Vec::new();
    let mut defaults: BTreeSet<String> = BTreeSet::new();
    for (line, kw, rest) in body {
        let raw = text.lines().nth(line - 1).unwrap_or_default();
        let rest_col = col_of(raw, raw.len() - rest.len());
        match kw {
            "group" => {
                let name = rest.trim();
                group = RuleGroup::from_name(name)
                    .ok_or_else(|| syntax(line, rest_col, &format!("unknown group `{name}`")))?;
            }
            "rule" | "default" => {
                let is_default = kw == "default" || group == RuleGroup::Default;
                let rule = parse_rule(
                    rest,
                    rest_col,
                    line,
                    &classes,
                    if is_default { RuleGroup::Default } else { group },
                )?;
                if is_default && !rule.is_context_free() {
                    return Err(syntax(line, rest_col, "default mappings take no context"));
                }
                if is_default {
                    for (g, _) in &rule.targets {
                        if !defaults.insert(g.clone()) {
                            return Err(G2pError::DuplicateDefault {
                                line,
                                grapheme: g.clone(),
                            });
                        }
                    }
                }
                rules.push(rule);
            }
            _ => unreachable!(),
        }
    }

    let check_targets = !declared.is_empty();
    if !check_targets {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for r in &rules {
            for (g, _) in &r.targets {
                for c in g.chars() {
                    if seen.insert(c.to_string()) {
                        declared.push(c.to_string());
                    }
                }
                if seen.insert(g.clone()) {
                    declared.push(g.clone());
                }
            }
        }
    }
    let graphemes = GraphemeSet::new(declared)?;
    if check_targets {
        for r in &rules {
            for (g, _) in &r.targets {
                if !graphemes.contains(g) {
                    return Err(G2pError::UnknownGrapheme {
                        line: r.line,
                        grapheme: g.clone(),
                    });
                }
            }
        }
    }
    Ok(RuleFile {
        graphemes,
        classes,
        rules,
    })
}

fn split_keyword(s: &str) -> (&str, &str) {
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    }
}

/// 1-based character column of byte offset `byte` in `line`.
fn col_of(line: &str, byte: usize) -> usize {
    line[..byte.min(line.len())].chars().count() + 1
}

fn syntax(line: usize, col: usize, message: &str) -> G2pError {
    G2pError::Syntax {
        line,
        col,
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lit(String),
    Class(String),
    Empty,
    Arrow,
    Semi,
    Slash,
    Under,
    Comma,
    Equals,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Caret,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// mappings and lists: only blanks, commas, `;`, `->`, `/`, `=` and
    /// quotes are special
    Target,
    Context,
}

fn lex(s: &str, col0: usize, line: usize, mode: Mode) -> Result<Vec<Token>, G2pError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let special_target = |c: char| c.is_whitespace() || matches!(c, ',' | ';' | '/' | '\'' | '=');
    let special_context = |c: char| {
        c.is_whitespace()
            || matches!(
                c,
                ',' | ';' | '/' | '\'' | '{' | '}' | '[' | ']' | '^' | '_' | '@' | '#' | '='
            )
    };
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        let push = |out: &mut Vec<Token>, kind| out.push(Token { kind, col });
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '\'' {
            let end = chars[i + 1..]
                .iter()
                .position(|&d| d == '\'')
                .ok_or_else(|| syntax(line, col, "unterminated quote"))?;
            let lit: String = chars[i + 1..i + 1 + end].iter().collect();
            if lit.is_empty() {
                return Err(syntax(line, col, "empty quoted symbol"));
            }
            push(&mut out, Tok::Lit(lit));
            i += end + 2;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            push(&mut out, Tok::Arrow);
            i += 2;
            continue;
        }
        if c == '[' && chars.get(i + 1) == Some(&']') {
            push(&mut out, Tok::Empty);
            i += 2;
            continue;
        }
        let simple = match c {
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '/' => Some(Tok::Slash),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(t) = simple {
            push(&mut out, t);
            i += 1;
            continue;
        }
        if mode == Mode::Context {
            let t = match c {
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                '[' => Some(Tok::LBrack),
                ']' => Some(Tok::RBrack),
                '^' => Some(Tok::Caret),
                '_' => Some(Tok::Under),
                '#' => Some(Tok::Lit(BOUNDARY.to_string())),
                _ => None,
            };
            if let Some(t) = t {
                push(&mut out, t);
                i += 1;
                continue;
            }
            if c == '@' {
                let name: String = chars[i + 1..]
                    .iter()
                    .take_while(|d| d.is_alphanumeric() || **d == '_')
                    .collect();
                if name.is_empty() {
                    push(&mut out, Tok::Lit("@".into()));
                    i += 1;
                } else {
                    i += 1 + name.chars().count();
                    push(&mut out, Tok::Class(name));
                }
                continue;
            }
        }
        let special = |d: char| match mode {
            Mode::Target => special_target(d),
            Mode::Context => special_context(d),
        };
        let mut j = i;
        while j < chars.len() && !special(chars[j]) && !(chars[j] == '-' && chars.get(j + 1) == Some(&'>')) {
            j += 1;
        }
        let lit: String = chars[i..j].iter().collect();
        push(&mut out, Tok::Lit(lit));
        i = j;
    }
    Ok(out)
}

fn parse_class(rest: &str, col0: usize, line: usize) -> Result<(String, Vec<String>), G2pError> {
    let toks = lex(rest, col0, line, Mode::Target)?;
    let mut it = toks.into_iter();
    let name = match it.next() {
        Some(Token { kind: Tok::Lit(n), .. }) if n.chars().all(|c| c.is_alphanumeric() || c == '_') => n,
        Some(t) => return Err(syntax(line, t.col, "expected class name")),
        None => return Err(syntax(line, col0, "expected class name")),
    };
    match it.next() {
        Some(Token { kind: Tok::Equals, .. }) => {}
        Some(t) => return Err(syntax(line, t.col, "expected `=`")),
        None => return Err(syntax(line, col0, "expected `=`")),
    }
    let mut members = Vec::new();
    for t in it {
        match t.kind {
            Tok::Lit(s) => members.push(s),
            Tok::Comma => {}
            _ => return Err(syntax(line, t.col, "class members are symbol strings")),
        }
    }
    Ok((name, members))
}

fn parse_rule(
    rest: &str,
    col0: usize,
    line: usize,
    classes: &BTreeMap<String, Vec<String>>,
    group: RuleGroup,
) -> Result<ConversionRule, G2pError> {
    // split off the context at the first unquoted `/`
    let mut in_quote = false;
    let mut split = None;
    for (i, c) in rest.char_indices() {
        match c {
            '\'' => in_quote = !in_quote,
            '/' if !in_quote => {
                split = Some(i);
                break;
            }
            _ => {}
        }
    }
    let (target_src, ctx_src) = match split {
        Some(i) => (&rest[..i], Some(&rest[i + 1..])),
        None => (rest, None),
    };
    let targets = parse_targets(target_src, col0, line)?;
    let (left, right) = match ctx_src {
        None => (Regex::Empty, Regex::Empty),
        Some(src) => {
            let ctx_col = col0 + rest[..split.unwrap() + 1].chars().count();
            let toks = lex(src, ctx_col, line, Mode::Context)?;
            let unders: Vec<usize> = toks
                .iter()
                .enumerate()
                .filter(|(_, t)| t.kind == Tok::Under)
                .map(|(i, _)| i)
                .collect();
            if unders.len() != 1 {
                let col = toks.get(unders.get(1).copied().unwrap_or(0)).map_or(ctx_col, |t| t.col);
                return Err(syntax(line, col, "context needs exactly one `_`"));
            }
            let u = unders[0];
            let mut p = CtxParser {
                toks: &toks[..u],
                pos: 0,
                line,
                classes,
            };
            let left = p.parse_top()?;
            let mut p = CtxParser {
                toks: &toks[u + 1..],
                pos: 0,
                line,
                classes,
            };
            let right = p.parse_top()?;
            (left, right)
        }
    };
    Ok(ConversionRule {
        targets,
        left,
        right,
        group,
        line,
    })
}

fn parse_targets(src: &str, col0: usize, line: usize) -> Result<Vec<(String, String)>, G2pError> {
    let toks = lex(src, col0, line, Mode::Target)?;
    let mut pairs = Vec::new();
    for chunk in toks.split(|t| t.kind == Tok::Semi) {
        let arrow = chunk
            .iter()
            .position(|t| t.kind == Tok::Arrow)
            .ok_or_else(|| syntax(line, chunk.first().map_or(col0, |t| t.col), "expected `G -> P`"))?;
        let side = |ts: &[Token]| -> Result<String, G2pError> {
            let mut s = String::new();
            for t in ts {
                match &t.kind {
                    Tok::Lit(l) => s.push_str(l),
                    Tok::Empty | Tok::Comma => {}
                    _ => return Err(syntax(line, t.col, "unexpected token in mapping")),
                }
            }
            if let Some(c) = s.chars().find(|&c| is_marker(c)) {
                return Err(syntax(
                    line,
                    ts.first().map_or(col0, |t| t.col),
                    &format!("marker `{c}` in mapping"),
                ));
            }
            Ok(s)
        };
        let g = side(&chunk[..arrow])?;
        let p = side(&chunk[arrow + 1..])?;
        if g.is_empty() {
            return Err(syntax(line, chunk[arrow].col, "empty grapheme"));
        }
        pairs.push((g, p));
    }
    Ok(pairs)
}

struct CtxParser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    classes: &'a BTreeMap<String, Vec<String>>,
}

impl CtxParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(1, |t| t.col)
    }

    fn parse_top(&mut self) -> Result<Regex, G2pError> {
        let r = self.parse_seq(false)?;
        if self.pos < self.toks.len() {
            return Err(syntax(self.line, self.col(), "unexpected token in context"));
        }
        Ok(r)
    }

    /// Sequence of items. Commas separate items unless `comma_alt`, where
    /// they end the sequence.
    fn parse_seq(&mut self, comma_alt: bool) -> Result<Regex, G2pError> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None | Some(Tok::RBrace) | Some(Tok::RBrack) => break,
                Some(Tok::Comma) if comma_alt => break,
                Some(Tok::Comma) => {
                    self.pos += 1;
                }
                _ => items.push(self.parse_item()?),
            }
        }
        Ok(match items.len() {
            0 => Regex::Empty,
            1 => items.pop().unwrap(),
            _ => Regex::Concat(items),
        })
    }

    fn parse_item(&mut self) -> Result<Regex, G2pError> {
        let col = self.col();
        let tok = self.toks[self.pos].kind.clone();
        self.pos += 1;
        let mut r = match tok {
            Tok::Lit(s) => Regex::string(&s),
            Tok::Empty => Regex::Empty,
            Tok::Class(name) => {
                let members = self.classes.get(&name).ok_or_else(|| G2pError::UnknownClass {
                    line: self.line,
                    name: name.clone(),
                })?;
                Regex::Union(members.iter().map(|m| Regex::string(m)).collect())
            }
            Tok::LBrack => {
                let inner = self.parse_seq(false)?;
                self.expect(Tok::RBrack, "`]`")?;
                inner
            }
            Tok::LBrace => {
                let mut alts = vec![self.parse_seq(true)?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    alts.push(self.parse_seq(true)?);
                }
                self.expect(Tok::RBrace, "`}`")?;
                Regex::Union(alts)
            }
            _ => return Err(syntax(self.line, col, "unexpected token in context")),
        };
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            r = Regex::optional(r);
        }
        Ok(r)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), G2pError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(self.line, self.col(), &format!("expected {what}")))
        }
    }
}
