use std::collections::{BTreeSet, HashMap};

use super::fst::{label, Fst, Label};
use super::{determinize_minimize, ops, replace, FsaError};

/// Regular expressions over symbols, extended with transducer operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    /// `[]`: the empty string.
    Empty,
    Symbol(char),
    Concat(Vec<Regex>),
    /// `{R1,...,Rn}`. An empty disjunction denotes the empty language.
    Union(Vec<Regex>),
    Optional(Box<Regex>),
    /// Strings of the first operand with strings of the second interspersed.
    Ignore(Box<Regex>, Box<Regex>),
    /// Maps every string of the first operand to every string of the second.
    Cross(Box<Regex>, Box<Regex>),
    Identity(Box<Regex>),
    Compose(Box<Regex>, Box<Regex>),
    /// Leftmost longest-match replacement: target, left context, right context.
    Replace(Box<Regex>, Box<Regex>, Box<Regex>),
    /// Reference to a macro (or a macro parameter) with arguments.
    Macro(String, Vec<Regex>),
}

impl Regex {
    /// Concatenation of the symbols of `s`; `Empty` for `""`.
    pub fn string(s: &str) -> Regex {
        let mut syms: Vec<Regex> = s.chars().map(Regex::Symbol).collect();
        match syms.len() {
            0 => Regex::Empty,
            1 => syms.pop().unwrap(),
            _ => Regex::Concat(syms),
        }
    }

    /// Disjunction of single symbols.
    pub fn symbols<I: IntoIterator<Item = char>>(chars: I) -> Regex {
        Regex::Union(chars.into_iter().map(Regex::Symbol).collect())
    }

    /// Any number of strings of `r`, expressed as `ignore([], r)`.
    pub fn star(r: Regex) -> Regex {
        Regex::Ignore(Box::new(Regex::Empty), Box::new(r))
    }

    pub fn cross(a: Regex, b: Regex) -> Regex {
        Regex::Cross(Box::new(a), Box::new(b))
    }

    pub fn ignore(a: Regex, b: Regex) -> Regex {
        Regex::Ignore(Box::new(a), Box::new(b))
    }

    pub fn optional(a: Regex) -> Regex {
        Regex::Optional(Box::new(a))
    }

    pub fn identity(a: Regex) -> Regex {
        Regex::Identity(Box::new(a))
    }

    pub fn compose(a: Regex, b: Regex) -> Regex {
        Regex::Compose(Box::new(a), Box::new(b))
    }

    pub fn replace(target: Regex, left: Regex, right: Regex) -> Regex {
        Regex::Replace(Box::new(target), Box::new(left), Box::new(right))
    }

    pub fn macro_ref(name: &str) -> Regex {
        Regex::Macro(name.to_string(), Vec::new())
    }

    fn collect_symbols(&self, out: &mut BTreeSet<char>) {
        match self {
            Regex::Empty | Regex::Macro(..) => {}
            Regex::Symbol(c) => {
                out.insert(*c);
            }
            Regex::Concat(xs) | Regex::Union(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Regex::Optional(a) | Regex::Identity(a) => a.collect_symbols(out),
            Regex::Ignore(a, b) | Regex::Cross(a, b) | Regex::Compose(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Regex::Replace(t, l, r) => {
                t.collect_symbols(out);
                l.collect_symbols(out);
                r.collect_symbols(out);
            }
        }
    }

    /// Symbols occurring anywhere in the expression (macros not expanded).
    pub fn symbols_used(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroDef {
    pub params: Vec<String>,
    pub body: Regex,
}

/// Named abbreviations. Parameters are referenced in the body as
/// argument-less [`Regex::Macro`] nodes.
#[derive(Debug, Clone, Default)]
pub struct MacroEnv {
    defs: HashMap<String, MacroDef>,
}

impl MacroEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn define(&mut self, name: &str, params: &[&str], body: Regex) {
        self.defs.insert(
            name.to_string(),
            MacroDef {
                params: params.iter().map(|p| p.to_string()).collect(),
                body,
            },
        );
    }

    pub fn get(&self, name: &str) -> Option<&MacroDef> {
        self.defs.get(name)
    }

    /// Replaces every macro reference by its definition.
    pub fn expand(&self, r: &Regex) -> Result<Regex, FsaError> {
        self.expand_in(r, &HashMap::new(), &mut Vec::new())
    }

    fn expand_in(
        &self,
        r: &Regex,
        bindings: &HashMap<String, Regex>,
        active: &mut Vec<String>,
    ) -> Result<Regex, FsaError> {
        let mut go = |x: &Regex| self.expand_in(x, bindings, active);
        Ok(match r {
            Regex::Empty | Regex::Symbol(_) => r.clone(),
            Regex::Concat(xs) => Regex::Concat(xs.iter().map(&mut go).collect::<Result<_, _>>()?),
            Regex::Union(xs) => Regex::Union(xs.iter().map(&mut go).collect::<Result<_, _>>()?),
            Regex::Optional(a) => Regex::optional(go(a)?),
            Regex::Identity(a) => Regex::identity(go(a)?),
            Regex::Ignore(a, b) => Regex::ignore(go(a)?, go(b)?),
            Regex::Cross(a, b) => Regex::cross(go(a)?, go(b)?),
            Regex::Compose(a, b) => Regex::compose(go(a)?, go(b)?),
            Regex::Replace(t, l, rr) => Regex::replace(go(t)?, go(l)?, go(rr)?),
            Regex::Macro(name, args) => {
                if args.is_empty() {
                    if let Some(bound) = bindings.get(name) {
                        return Ok(bound.clone());
                    }
                }
                let def = self
                    .defs
                    .get(name)
                    .ok_or_else(|| FsaError::UnboundMacro(name.clone()))?;
                if def.params.len() != args.len() {
                    return Err(FsaError::ArityMismatch {
                        name: name.clone(),
                        expected: def.params.len(),
                        got: args.len(),
                    });
                }
                let args = args.iter().map(&mut go).collect::<Result<Vec<_>, _>>()?;
                if active.contains(name) {
                    return Err(FsaError::CyclicMacro(name.clone()));
                }
                let inner: HashMap<String, Regex> = def.params.iter().cloned().zip(args).collect();
                active.push(name.clone());
                let body = self.expand_in(&def.body, &inner, active);
                active.pop();
                body?
            }
        })
    }
}

/// Compiles expressions against a fixed input alphabet.
///
/// The alphabet matters for replacement: symbols outside it (and outside the
/// expression) are rejected rather than copied.
#[derive(Debug, Clone, Default)]
pub struct Compiler {
    macros: MacroEnv,
    alphabet: BTreeSet<char>,
}

impl Compiler {
    pub fn new(macros: MacroEnv) -> Self {
        Compiler {
            macros,
            alphabet: BTreeSet::new(),
        }
    }

    pub fn with_alphabet<I: IntoIterator<Item = char>>(mut self, chars: I) -> Self {
        self.alphabet.extend(chars);
        self
    }

    pub fn macros(&self) -> &MacroEnv {
        &self.macros
    }

    pub fn compile(&self, ast: &Regex) -> Result<Fst, FsaError> {
        let expanded = self.macros.expand(ast)?;
        let mut sigma = self.alphabet.clone();
        expanded.collect_symbols(&mut sigma);
        let sigma: Vec<Label> = sigma.into_iter().map(label).collect();
        build(&expanded, &sigma)
    }
}

/// Compiles `ast` with the alphabet of its own symbols.
pub fn compile(ast: &Regex, macros: &MacroEnv) -> Result<Fst, FsaError> {
    Compiler::new(macros.clone()).compile(ast)
}

fn build(r: &Regex, sigma: &[Label]) -> Result<Fst, FsaError> {
    let go = |x: &Regex| build(x, sigma);
    Ok(match r {
        Regex::Empty => Fst::epsilon(),
        Regex::Symbol(c) => Fst::from_str_acceptor(&c.to_string()),
        Regex::Concat(xs) => {
            let parts = xs.iter().map(go).collect::<Result<Vec<_>, _>>()?;
            determinize_minimize(&ops::concat(&parts))
        }
        Regex::Union(xs) => {
            let parts = xs.iter().map(go).collect::<Result<Vec<_>, _>>()?;
            determinize_minimize(&ops::union(&parts))
        }
        Regex::Optional(a) => determinize_minimize(&ops::optional(&go(a)?)),
        Regex::Ignore(a, b) => determinize_minimize(&ops::ignore(&go(a)?, &go(b)?)),
        Regex::Cross(a, b) => ops::cross_product(&go(a)?, &go(b)?)?,
        Regex::Identity(a) => determinize_minimize(&go(a)?.project_input()),
        Regex::Compose(a, b) => determinize_minimize(&ops::compose(&go(a)?, &go(b)?)),
        Regex::Replace(t, l, rr) => replace::replace(&go(t)?, &go(l)?, &go(rr)?, sigma)?,
        Regex::Macro(name, _) => return Err(FsaError::UnboundMacro(name.clone())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn cross_product_of_symbols() {
        let f = compile(&Regex::cross(Regex::string("a"), Regex::string("b")), &MacroEnv::new()).unwrap();
        assert_eq!(f.apply("a"), set(&["b"]));
    }

    #[test]
    fn ignore_accepts_interspersed_markers() {
        let r = Regex::ignore(Regex::string("ab"), Regex::symbols(['-']));
        let f = compile(&r, &MacroEnv::new()).unwrap();
        for s in ["a-b", "ab", "a--b"] {
            assert!(f.accepts(s), "{s}");
        }
    }

    #[test]
    fn finite_disjunction() {
        let f = compile(
            &Regex::Union(vec![Regex::string("a"), Regex::string("aa")]),
            &MacroEnv::new(),
        )
        .unwrap();
        assert!(f.accepts("a") && f.accepts("aa"));
        assert!(!f.accepts("") && !f.accepts("aaa"));
    }

    #[test]
    fn macros_with_parameters() {
        let mut env = MacroEnv::new();
        env.define(
            "twice",
            &["X"],
            Regex::Concat(vec![Regex::macro_ref("X"), Regex::macro_ref("X")]),
        );
        let r = Regex::Macro("twice".into(), vec![Regex::string("ab")]);
        assert!(compile(&r, &env).unwrap().accepts("abab"));
    }

    #[test]
    fn macro_errors() {
        let mut env = MacroEnv::new();
        env.define("loop", &[], Regex::macro_ref("loop"));
        env.define("one", &["X"], Regex::macro_ref("X"));
        assert_eq!(
            compile(&Regex::macro_ref("nope"), &env).unwrap_err(),
            FsaError::UnboundMacro("nope".into())
        );
        assert_eq!(
            compile(&Regex::macro_ref("loop"), &env).unwrap_err(),
            FsaError::CyclicMacro("loop".into())
        );
        assert!(matches!(
            compile(&Regex::macro_ref("one"), &env).unwrap_err(),
            FsaError::ArityMismatch {
                expected: 1,
                got: 0,
                ..
            }
        ));
    }

    #[test]
    fn replace_through_compiler() {
        let r = Regex::replace(
            Regex::cross(Regex::string("ab"), Regex::string("X")),
            Regex::Empty,
            Regex::Empty,
        );
        assert_eq!(compile(&r, &MacroEnv::new()).unwrap().apply("aab"), set(&["aX"]));
    }

    #[test]
    fn replace_rejects_transducer_context() {
        let r = Regex::replace(
            Regex::cross(Regex::string("a"), Regex::string("b")),
            Regex::cross(Regex::string("a"), Regex::string("c")),
            Regex::Empty,
        );
        assert!(matches!(compile(&r, &MacroEnv::new()), Err(FsaError::NonAcceptor(_))));
    }
}
