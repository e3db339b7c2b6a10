use std::collections::BTreeSet;
use std::fmt;

use super::{ConversionRule, G2pError, GraphemeSet, RuleFile, RuleGroup};
use crate::fsa::{compose_all, Compiler, Fst, MacroEnv, Regex, BOUNDARY, CONVERTED, UNCONVERTED};

fn markers() -> Regex {
    Regex::symbols([UNCONVERTED, CONVERTED])
}

/// The pipeline's building blocks as macros:
///
/// ```text
/// segmentation(G)      = replace([identity(G), [] x -], [], [])
/// g2p(T, L, R)         = replace([T, - x +], [ignore(L,{+,-}), {-,+}], ignore(R,{+,-}))
/// mark_begin_end(S)    = [[] x [#,-], identity(S*), [] x #]
/// clean_up             = replace({-,+,#} x [], [], [])
/// ```
pub fn g2p_macros() -> MacroEnv {
    let p = Regex::macro_ref;
    let mut env = MacroEnv::new();
    env.define(
        "segmentation",
        &["G"],
        Regex::replace(
            Regex::Concat(vec![
                Regex::identity(p("G")),
                Regex::cross(Regex::Empty, Regex::Symbol(UNCONVERTED)),
            ]),
            Regex::Empty,
            Regex::Empty,
        ),
    );
    env.define(
        "g2p",
        &["Target", "LtCont", "RtCont"],
        Regex::replace(
            Regex::Concat(vec![
                p("Target"),
                Regex::cross(Regex::Symbol(UNCONVERTED), Regex::Symbol(CONVERTED)),
            ]),
            Regex::Concat(vec![Regex::ignore(p("LtCont"), markers()), markers()]),
            Regex::ignore(p("RtCont"), markers()),
        ),
    );
    env.define(
        "mark_begin_end",
        &["S"],
        Regex::Concat(vec![
            Regex::cross(Regex::Empty, Regex::string(&format!("{BOUNDARY}{UNCONVERTED}"))),
            Regex::identity(Regex::star(p("S"))),
            Regex::cross(Regex::Empty, Regex::Symbol(BOUNDARY)),
        ]),
    );
    env.define(
        "clean_up",
        &[],
        Regex::replace(
            Regex::cross(Regex::symbols([UNCONVERTED, CONVERTED, BOUNDARY]), Regex::Empty),
            Regex::Empty,
            Regex::Empty,
        ),
    );
    env
}

fn compiler(alphabet: &BTreeSet<char>) -> Compiler {
    Compiler::new(g2p_macros()).with_alphabet(alphabet.iter().copied())
}

fn graphemes_regex(g: &GraphemeSet) -> Regex {
    Regex::Union(g.entries().iter().map(|e| Regex::string(e)).collect())
}

/// Leftmost longest-match segmentation: every grapheme is copied and
/// followed by `-`.
pub fn build_segmenter(g: &GraphemeSet) -> Result<Fst, G2pError> {
    if g.is_empty() {
        return Err(G2pError::EmptyGraphemeSet);
    }
    let ast = Regex::Macro("segmentation".into(), vec![graphemes_regex(g)]);
    Ok(compiler(&g.chars()).compile(&ast)?)
}

fn target_regex(targets: &[(String, String)]) -> Regex {
    Regex::Union(
        targets
            .iter()
            .map(|(g, p)| Regex::cross(Regex::string(g), Regex::string(p)))
            .collect(),
    )
}

/// The transducer for one conversion rule over `alphabet` (which should
/// contain every symbol of the pipeline, markers included).
pub fn build_g2p_rule(r: &ConversionRule, alphabet: &BTreeSet<char>) -> Result<Fst, G2pError> {
    let ast = Regex::Macro(
        "g2p".into(),
        vec![target_regex(&r.targets), r.left.clone(), r.right.clone()],
    );
    Ok(compiler(alphabet).compile(&ast)?)
}

/// A compiled rule file, kept as separate stages.
#[derive(Debug, Clone)]
pub struct Pipeline {
    rules: RuleFile,
    alphabet: BTreeSet<char>,
    segmenter: Fst,
    marker: Fst,
    conversion: Vec<Fst>,
    cleanup: Fst,
}

/// The intermediate strings of one transcription.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stages {
    pub segmented: String,
    pub marked: String,
    pub converted: String,
    pub cleaned: String,
}

impl fmt::Display for Stages {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "s: {}", self.segmented)?;
        writeln!(f, "m: {}", self.marked)?;
        writeln!(f, "co: {}", self.converted)?;
        writeln!(f, "cl: {}", self.cleaned)
    }
}

impl Pipeline {
    pub fn new(rf: &RuleFile) -> Result<Self, G2pError> {
        let mut alphabet = rf.symbols();
        alphabet.extend([UNCONVERTED, CONVERTED, BOUNDARY]);
        let segmenter = build_segmenter(&rf.graphemes)?;
        let graph_chars = rf.graphemes.chars();
        let marker = compiler(&alphabet).compile(&Regex::Macro(
            "mark_begin_end".into(),
            vec![Regex::symbols(graph_chars.into_iter().chain([UNCONVERTED]))],
        ))?;

        // default mappings are context free and disjoint, so they form a
        // single rule
        let mut conversion = Vec::new();
        let mut defaults: Vec<(String, String)> = Vec::new();
        for r in &rf.rules {
            if r.group == RuleGroup::Default {
                defaults.extend(r.targets.iter().cloned());
            } else {
                conversion.push(build_g2p_rule(r, &alphabet)?);
            }
        }
        if !defaults.is_empty() {
            let merged = ConversionRule {
                targets: defaults,
                ..ConversionRule::default_mapping("", "")
            };
            conversion.push(build_g2p_rule(&merged, &alphabet)?);
        }
        let cleanup = compiler(&alphabet).compile(&Regex::macro_ref("clean_up"))?;
        Ok(Pipeline {
            rules: rf.clone(),
            alphabet,
            segmenter,
            marker,
            conversion,
            cleanup,
        })
    }

    pub fn rule_file(&self) -> &RuleFile {
        &self.rules
    }

    pub fn alphabet(&self) -> &BTreeSet<char> {
        &self.alphabet
    }

    pub fn segmenter(&self) -> &Fst {
        &self.segmenter
    }

    pub fn marker(&self) -> &Fst {
        &self.marker
    }

    /// One transducer per conversion rule in application order; the default
    /// mappings come last as one transducer.
    pub fn conversion_rules(&self) -> &[Fst] {
        &self.conversion
    }

    pub fn cleanup(&self) -> &Fst {
        &self.cleanup
    }

    /// Every stage in application order.
    pub fn stages(&self) -> Vec<&Fst> {
        let mut out = vec![&self.segmenter, &self.marker];
        out.extend(self.conversion.iter());
        out.push(&self.cleanup);
        out
    }

    /// The whole pipeline as one minimal transducer.
    pub fn compose(&self) -> Fst {
        let stages: Vec<Fst> = self.stages().into_iter().cloned().collect();
        compose_all(&stages)
    }

    fn run(&self, fst: &Fst, word: &str, input: &str, stage: &'static str) -> Result<String, G2pError> {
        let out = fst.apply(input);
        match out.len() {
            0 => Err(G2pError::Rejected {
                word: word.to_string(),
                stage,
            }),
            1 => Ok(out.into_iter().next().unwrap()),
            _ => Err(G2pError::NonFunctional {
                word: word.to_string(),
                outputs: out.into_iter().collect(),
            }),
        }
    }

    /// `word` split into graphemes, each followed by `-`.
    pub fn segment(&self, word: &str) -> Result<String, G2pError> {
        if let Err(position) = self.rules.graphemes.tokenize(word) {
            return Err(G2pError::Unsegmentable {
                word: word.to_string(),
                position,
            });
        }
        self.run(&self.segmenter, word, word, "segmentation")
    }

    /// The converted string with markers, e.g. `#-a+N+k-...-#`.
    pub fn convert(&self, word: &str) -> Result<String, G2pError> {
        Ok(self.transcribe_stages(word)?.converted)
    }

    pub fn transcribe(&self, word: &str) -> Result<String, G2pError> {
        Ok(self.transcribe_stages(word)?.cleaned)
    }

    pub fn transcribe_stages(&self, word: &str) -> Result<Stages, G2pError> {
        let segmented = self.segment(word)?;
        let marked = self.run(&self.marker, word, &segmented, "boundary marking")?;
        let mut converted = marked.clone();
        for rule in &self.conversion {
            converted = self.run(rule, word, &converted, "conversion")?;
        }
        let cleaned = self.run(&self.cleanup, word, &converted, "clean-up")?;
        Ok(Stages {
            segmented,
            marked,
            converted,
            cleaned,
        })
    }
}

/// The complete pipeline of `rf` as one minimal transducer.
pub fn build_pipeline(rf: &RuleFile) -> Result<Fst, G2pError> {
    Ok(Pipeline::new(rf)?.compose())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dutch() -> Pipeline {
        Pipeline::new(&RuleFile::dutch()).unwrap()
    }

    #[test]
    fn segmentation_examples() {
        let p = dutch();
        assert_eq!(p.segment("beiaardier").unwrap(), "b-ei-aa-r-d-ie-r-");
        assert_eq!(p.segment("waaien").unwrap(), "w-aai-e-n-");
        assert_eq!(
            p.segment("q7x").unwrap_err(),
            G2pError::Unsegmentable {
                word: "q7x".into(),
                position: 1
            }
        );
    }

    #[test]
    fn aanknopingspunt_stages() {
        let s = dutch().transcribe_stages("aanknopingspunt").unwrap();
        assert_eq!(s.segmented, "aa-n-k-n-o-p-i-ng-s-p-u-n-t-");
        assert_eq!(s.marked, "#-aa-n-k-n-o-p-i-ng-s-p-u-n-t-#");
        assert_eq!(s.converted, "#-a+N+k-n-o-p-I+N+s-p-}+n-t-#");
        assert_eq!(s.cleaned, "aNknopINsp}nt");
    }

    #[test]
    fn baseline_error_on_aalbessen() {
        let p = dutch();
        assert_eq!(p.convert("aalbessen").unwrap(), "#-a+l-b-@+s+@++#");
        assert_eq!(p.transcribe("aalbessen").unwrap(), "alb@s@");
    }

    #[test]
    fn final_n_after_schwa_is_deleted() {
        let rf = RuleFile::dutch();
        let p = dutch();
        let rule = rf
            .rules
            .iter()
            .find(|r| r.targets == [("n".to_string(), String::new())])
            .unwrap();
        let fst = build_g2p_rule(rule, p.alphabet()).unwrap();
        assert_eq!(fst.apply("#-b-@+n-#"), BTreeSet::from(["#-b-@++#".to_string()]));
        assert_eq!(fst.apply("#-b-a+n-#"), BTreeSet::from(["#-b-a+n-#".to_string()]));
    }

    #[test]
    fn eu_before_m() {
        assert!(dutch().transcribe("museum").unwrap().contains("ej}"));
    }

    #[test]
    fn single_grapheme_default() {
        let rf = super::super::parse_rule_file("default t -> t").unwrap();
        assert_eq!(Pipeline::new(&rf).unwrap().transcribe("t").unwrap(), "t");
    }

    #[test]
    fn rule_without_match_is_identity() {
        let rf = RuleFile::dutch();
        let p = dutch();
        let n_rule = rf
            .rules
            .iter()
            .find(|r| r.targets[0].0 == "n" && r.right != Regex::Empty)
            .unwrap();
        let fst = build_g2p_rule(n_rule, p.alphabet()).unwrap();
        assert_eq!(fst.apply("#-aa-n-k-"), BTreeSet::from(["#-aa-N+k-".to_string()]));
        assert_eq!(fst.apply("#-o-p-#"), BTreeSet::from(["#-o-p-#".to_string()]));
    }
}
