//! WebAssembly bindings for the demo page in `www/`. Every export takes and
//! returns plain strings; errors come back as the rejection message.

use std::collections::{BTreeMap, BTreeSet};

use g2pfst::align::{build_training_corpus, AlignConfig};
use g2pfst::fsa::{compile, replace_build, union, Fst, MacroEnv, Regex};
use g2pfst::g2p::{parse_rule_file, Pipeline, RuleFile};
use wasm_bindgen::prelude::*;

fn pipeline(rules: &str) -> Result<Pipeline, String> {
    let rf = if rules.trim().is_empty() {
        RuleFile::dutch()
    } else {
        parse_rule_file(rules).map_err(|e| format!("rules: {e}"))?
    };
    Pipeline::new(&rf).map_err(|e| e.to_string())
}

/// The four stage lines for `word`; empty `rules` means the shipped Dutch
/// rule file.
#[wasm_bindgen]
pub fn transcribe_stages(word: &str, rules: &str) -> Result<String, String> {
    let p = pipeline(rules)?;
    Ok(p.transcribe_stages(word.trim()).map_err(|e| e.to_string())?.to_string())
}

/// `from -> to` pairs, one per line or separated by `;`.
fn parse_targets(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for item in text.split(['\n', ';']).map(str::trim).filter(|s| !s.is_empty()) {
        let (from, to) = item
            .split_once("->")
            .ok_or_else(|| format!("`{item}`: expected `from -> to`"))?;
        out.insert(from.trim().to_string(), to.trim().to_string());
    }
    Ok(out)
}

/// Comma-separated literal alternatives; empty means no restriction.
fn parse_context(text: &str) -> Regex {
    let alts: Vec<Regex> = text.split(',').map(|s| Regex::string(s.trim())).collect();
    if text.trim().is_empty() {
        Regex::Empty
    } else {
        Regex::Union(alts)
    }
}

/// Leftmost-longest replacement of `targets` between `left` and `right`
/// applied to `input`, with the size of the compiled transducer.
#[wasm_bindgen]
pub fn replace_playground(targets: &str, left: &str, right: &str, input: &str) -> Result<String, String> {
    let t = parse_targets(targets)?;
    let (l, r) = (parse_context(left), parse_context(right));
    let mut sigma: BTreeSet<u32> = input.chars().map(|c| c as u32).collect();
    for s in t
        .iter()
        .flat_map(|(a, b)| [a, b])
        .chain([&left.to_string(), &right.to_string()])
    {
        sigma.extend(s.chars().filter(|c| !c.is_whitespace() && *c != ',').map(|c| c as u32));
    }
    let env = MacroEnv::new();
    let target = union(&t.iter().map(|(a, b)| Fst::from_pair(a, b)).collect::<Vec<_>>());
    let fst = replace_build(
        &target,
        &compile(&l, &env).map_err(|e| e.to_string())?,
        &compile(&r, &env).map_err(|e| e.to_string())?,
        &sigma.into_iter().collect::<Vec<_>>(),
    )
    .map_err(|e| e.to_string())?;
    let out = fst.apply(input);
    let shown = out.iter().next().cloned().ok_or("no output")?;
    Ok(format!(
        "{shown}\n({} states, {} transitions)",
        fst.num_states(),
        fst.num_arcs()
    ))
}

/// Aligns `word` with its gold `phonemes` and returns three rows: graphemes,
/// system cells, gold cells. Empty cells show as `_`.
#[wasm_bindgen]
pub fn align_word(word: &str, phonemes: &str, rules: &str) -> Result<String, String> {
    let p = pipeline(rules)?;
    let lex = vec![(word.trim().to_string(), phonemes.trim().to_string())];
    let (corpus, _, report) = build_training_corpus(&lex, &p, &AlignConfig::default());
    let e = corpus.first().ok_or_else(|| {
        report.discarded.first().map_or("not aligned".to_string(), |(w, why)| {
            format!("`{w}` not aligned: {why}")
        })
    })?;
    let row = |cells: &[String]| {
        cells
            .iter()
            .map(|c| if c.is_empty() { "_" } else { c.as_str() })
            .collect::<Vec<_>>()
            .join(" | ")
    };
    Ok(format!(
        "GR: {}\nSP: {}\nCP: {}",
        row(&e.graphemes),
        row(&e.system),
        row(&e.gold)
    ))
}
