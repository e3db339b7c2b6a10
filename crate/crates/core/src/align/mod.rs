//! Grapheme-level alignment of system output and gold transcriptions.
//!
//! System cells come for free from the converted stage of the pipeline: the
//! markers after each grapheme split the phoneme string into one cell per
//! grapheme. Gold cells are found by hand-seeded probabilistic alignment:
//! the rule file licenses a set of grapheme-to-phoneme-string mappings (the
//! allowables), every split of the gold string licensed by them (plus at
//! most one unseen mapping) is enumerated, mapping probabilities are
//! estimated from all splits, and the most probable split is kept.

// the lattice code indexes several tables with the same (i, j, u)
#![allow(clippy::needless_range_loop)]

mod tsv;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fsa::{BOUNDARY, CONVERTED, UNCONVERTED};
use crate::g2p::{G2pError, Pipeline, RuleFile};

pub use tsv::{format_aligned, parse_aligned};

/// Lattice table indexed by grapheme, gold position and unseen budget.
type Table<T> = Vec<Vec<Vec<T>>>;

/// Grapheme to the phoneme strings it may align with; `""` is the null
/// phoneme.
pub type Allowables = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlignError {
    #[error("`{0}` cannot be aligned with its transcription")]
    Unalignable(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    G2p(#[from] G2pError),
}

/// How alignments contribute to the mapping counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Every enumerated alignment counts once.
    #[default]
    PerAlignment,
    /// The alignments of one word share a total weight of one.
    PerWord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignConfig {
    /// Unseen mappings allowed per word.
    pub max_unseen: usize,
    /// Longest phoneme string an unseen mapping may cover.
    pub max_unseen_len: usize,
    /// Probability of a mapping that was never counted.
    pub epsilon: f64,
    pub weighting: Weighting,
    /// An unseen mapping becomes allowable once this many words need it.
    pub min_support: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            max_unseen: 1,
            max_unseen_len: 3,
            epsilon: 1e-6,
            weighting: Weighting::PerAlignment,
            min_support: 2,
        }
    }
}

/// One word with its graphemes and the system and gold phoneme cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedEntry {
    pub word: String,
    pub graphemes: Vec<String>,
    pub system: Vec<String>,
    pub gold: Vec<String>,
}

impl AlignedEntry {
    pub fn system_string(&self) -> String {
        self.system.concat()
    }

    pub fn gold_string(&self) -> String {
        self.gold.concat()
    }
}

/// Splits the converted stage of `word` into one phoneme cell per grapheme.
pub fn align_system_output(word: &str, pipeline: &Pipeline) -> Result<(Vec<String>, Vec<String>), G2pError> {
    let graphemes: Vec<String> = pipeline
        .rule_file()
        .graphemes
        .tokenize(word)
        .map_err(|position| G2pError::Unsegmentable {
            word: word.to_string(),
            position,
        })?
        .into_iter()
        .map(str::to_string)
        .collect();
    let converted = pipeline.convert(word)?;
    let cells = split_cells(&converted);
    if cells.len() != graphemes.len() {
        return Err(G2pError::NonFunctional {
            word: word.to_string(),
            outputs: vec![converted],
        });
    }
    Ok((graphemes, cells))
}

/// `#-a+l-b-@+#` to `[a, l, b, @]`.
fn split_cells(converted: &str) -> Vec<String> {
    let prefix: String = [BOUNDARY, UNCONVERTED].iter().collect();
    let body = converted.strip_prefix(prefix.as_str()).unwrap_or(converted);
    let body = body.strip_suffix(BOUNDARY).unwrap_or(body);
    let mut cells = Vec::new();
    let mut cur = String::new();
    for c in body.chars() {
        if c == UNCONVERTED || c == CONVERTED {
            cells.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    cells
}

/// Mappings licensed by the rule file: every rule target, and every
/// grapheme mapped to itself (graphemes no rule converts pass through).
pub fn rule_allowables(rf: &RuleFile) -> Allowables {
    let mut a = Allowables::new();
    for g in rf.graphemes.entries() {
        a.entry(g.clone()).or_default().insert(g.clone());
    }
    for r in &rf.rules {
        for (g, p) in &r.targets {
            a.entry(g.clone()).or_default().insert(p.clone());
        }
    }
    a
}

/// Rule allowables extended with the unseen mappings that words of `corpus`
/// need to align at all, kept when at least `cfg.min_support` words need
/// them.
pub fn derive_allowables(rf: &RuleFile, corpus: &[(Vec<String>, String)], cfg: &AlignConfig) -> Allowables {
    let mut a = rule_allowables(rf);
    let mut support: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (graphemes, gold) in corpus {
        let lattice = Lattice::new(graphemes, gold, &a, 0, cfg.max_unseen_len);
        if lattice.feasible() {
            continue;
        }
        let mut needed = BTreeSet::new();
        for cells in enumerate_alignments(graphemes, gold, &a, 1, cfg.max_unseen_len) {
            for (g, c) in graphemes.iter().zip(cells) {
                if !is_allowed(&a, g, &c) {
                    needed.insert((g.clone(), c));
                }
            }
        }
        for m in needed {
            *support.entry(m).or_default() += 1;
        }
    }
    for ((g, c), n) in support {
        if n >= cfg.min_support.max(1) {
            a.entry(g).or_default().insert(c);
        }
    }
    a
}

fn is_allowed(a: &Allowables, g: &str, cell: &str) -> bool {
    a.get(g).is_some_and(|s| s.contains(cell))
}

/// The alignment search space of one word: nodes are (grapheme index,
/// phoneme index, unseen mappings left), edges are cells.
struct Lattice<'a> {
    graphemes: &'a [String],
    gold: Vec<char>,
    /// `edges[i][j]`: cells for grapheme `i` starting at phoneme `j`, as
    /// (length, unseen)
    edges: Vec<Vec<Vec<(usize, bool)>>>,
    budget: usize,
    /// `reach[i][j][u]`: the suffix from (i, j) aligns with at most `u`
    /// unseen mappings
    reach: Vec<Vec<Vec<bool>>>,
}

impl<'a> Lattice<'a> {
    fn new(graphemes: &'a [String], gold: &str, a: &Allowables, budget: usize, max_unseen_len: usize) -> Self {
        let gold: Vec<char> = gold.chars().collect();
        let n = graphemes.len();
        let m = gold.len();
        let mut edges = vec![vec![Vec::new(); m + 1]; n];
        for (i, g) in graphemes.iter().enumerate() {
            let allowed = a.get(g);
            let longest_allowed = allowed.map_or(0, |s| s.iter().map(|c| c.chars().count()).max().unwrap_or(0));
            for (j, slot) in edges[i].iter_mut().enumerate() {
                let longest = longest_allowed.max(if budget > 0 { max_unseen_len } else { 0 });
                for len in 0..=longest.min(m - j) {
                    let cell: String = gold[j..j + len].iter().collect();
                    let seen = allowed.is_some_and(|s| s.contains(&cell));
                    if seen {
                        slot.push((len, false));
                    } else if budget > 0 && len <= max_unseen_len {
                        slot.push((len, true));
                    }
                }
            }
        }
        let mut reach = vec![vec![vec![false; budget + 1]; m + 1]; n + 1];
        reach[n][m] = vec![true; budget + 1];
        for i in (0..n).rev() {
            for j in 0..=m {
                for u in 0..=budget {
                    reach[i][j][u] = edges[i][j].iter().any(|&(len, unseen)| {
                        if unseen {
                            u > 0 && reach[i + 1][j + len][u - 1]
                        } else {
                            reach[i + 1][j + len][u]
                        }
                    });
                }
            }
        }
        Lattice {
            graphemes,
            gold,
            edges,
            budget,
            reach,
        }
    }

    fn feasible(&self) -> bool {
        self.reach[0][0][self.budget]
    }

    fn cell(&self, j: usize, len: usize) -> String {
        self.gold[j..j + len].iter().collect()
    }

    /// Successor node over an edge, if the rest can still be aligned.
    fn next(&self, i: usize, j: usize, u: usize, len: usize, unseen: bool) -> Option<usize> {
        let u2 = if unseen { u.checked_sub(1)? } else { u };
        self.reach[i + 1][j + len][u2].then_some(u2)
    }

    fn enumerate(&self) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        if self.feasible() {
            let mut cells = Vec::new();
            self.walk(0, 0, self.budget, &mut cells, &mut out);
        }
        out
    }

    fn walk(&self, i: usize, j: usize, u: usize, cells: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if i == self.graphemes.len() {
            out.push(cells.clone());
            return;
        }
        for &(len, unseen) in &self.edges[i][j] {
            if let Some(u2) = self.next(i, j, u, len, unseen) {
                cells.push(self.cell(j, len));
                self.walk(i + 1, j + len, u2, cells, out);
                cells.pop();
            }
        }
    }

    /// Number of alignments through every node, forwards and backwards, to
    /// count mappings without enumerating.
    fn path_counts(&self) -> (Table<f64>, Table<f64>) {
        let n = self.graphemes.len();
        let m = self.gold.len();
        let b = self.budget;
        let mut bwd = vec![vec![vec![0.0; b + 1]; m + 1]; n + 1];
        bwd[n][m] = vec![1.0; b + 1];
        for i in (0..n).rev() {
            for j in 0..=m {
                for u in 0..=b {
                    let mut total = 0.0;
                    for &(len, unseen) in &self.edges[i][j] {
                        if let Some(u2) = self.next(i, j, u, len, unseen) {
                            total += bwd[i + 1][j + len][u2];
                        }
                    }
                    bwd[i][j][u] = total;
                }
            }
        }
        let mut fwd = vec![vec![vec![0.0; b + 1]; m + 1]; n + 1];
        fwd[0][0][b] = 1.0;
        for i in 0..n {
            for j in 0..=m {
                for u in 0..=b {
                    let f = fwd[i][j][u];
                    if f == 0.0 {
                        continue;
                    }
                    for &(len, unseen) in &self.edges[i][j] {
                        if let Some(u2) = self.next(i, j, u, len, unseen) {
                            fwd[i + 1][j + len][u2] += f;
                        }
                    }
                }
            }
        }
        (fwd, bwd)
    }
}

/// Every split of `gold` into one cell per grapheme such that each cell is
/// allowable for its grapheme, except for at most `max_unseen` cells of at
/// most `max_unseen_len` phonemes.
pub fn enumerate_alignments(
    graphemes: &[String],
    gold: &str,
    a: &Allowables,
    max_unseen: usize,
    max_unseen_len: usize,
) -> Vec<Vec<String>> {
    Lattice::new(graphemes, gold, a, max_unseen, max_unseen_len).enumerate()
}

/// Per-grapheme mapping probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingProbs {
    probs: BTreeMap<String, BTreeMap<String, f64>>,
    epsilon: f64,
}

impl MappingProbs {
    /// Probability of `g -> cell`; `epsilon` for mappings never counted.
    pub fn prob(&self, g: &str, cell: &str) -> f64 {
        self.probs
            .get(g)
            .and_then(|m| m.get(cell))
            .copied()
            .unwrap_or(self.epsilon)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Counted mappings of `g` with their probabilities.
    pub fn mappings(&self, g: &str) -> Option<&BTreeMap<String, f64>> {
        self.probs.get(g)
    }

    pub fn graphemes(&self) -> impl Iterator<Item = &String> {
        self.probs.keys()
    }
}

/// Counts allowable mappings over all alignments of every word and
/// normalizes the counts per grapheme.
pub fn estimate_mapping_probs(corpus: &[(Vec<String>, String)], a: &Allowables, cfg: &AlignConfig) -> MappingProbs {
    let mut counts: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (graphemes, gold) in corpus {
        let lat = Lattice::new(graphemes, gold, a, cfg.max_unseen, cfg.max_unseen_len);
        if !lat.feasible() {
            continue;
        }
        let (fwd, bwd) = lat.path_counts();
        let total = bwd[0][0][lat.budget];
        let weight = match cfg.weighting {
            Weighting::PerAlignment => 1.0,
            Weighting::PerWord => 1.0 / total,
        };
        for (i, g) in graphemes.iter().enumerate() {
            for j in 0..=lat.gold.len() {
                for u in 0..=lat.budget {
                    let f = fwd[i][j][u];
                    if f == 0.0 {
                        continue;
                    }
                    for &(len, unseen) in &lat.edges[i][j] {
                        if unseen {
                            continue;
                        }
                        if let Some(u2) = lat.next(i, j, u, len, unseen) {
                            let through = f * bwd[i + 1][j + len][u2];
                            if through > 0.0 {
                                *counts
                                    .entry(g.clone())
                                    .or_default()
                                    .entry(lat.cell(j, len))
                                    .or_default() += through * weight;
                            }
                        }
                    }
                }
            }
        }
    }
    let probs = counts
        .into_iter()
        .map(|(g, cells)| {
            let total: f64 = cells.values().sum();
            (g, cells.into_iter().map(|(c, n)| (c, n / total)).collect())
        })
        .collect();
    MappingProbs {
        probs,
        epsilon: cfg.epsilon,
    }
}

/// The alignment with the highest product of mapping probabilities. Equal
/// products go to the alignment whose first differing cell is longer, then
/// lexicographically smaller.
pub fn best_alignment(
    graphemes: &[String],
    gold: &str,
    probs: &MappingProbs,
    a: &Allowables,
    cfg: &AlignConfig,
) -> Option<Vec<String>> {
    let lat = Lattice::new(graphemes, gold, a, cfg.max_unseen, cfg.max_unseen_len);
    if !lat.feasible() {
        return None;
    }
    let n = graphemes.len();
    let m = lat.gold.len();
    let b = lat.budget;
    // best[i][j][u]: (log probability of the suffix, chosen edge)
    let mut best: Table<Option<(f64, usize, usize)>> = vec![vec![vec![None; b + 1]; m + 1]; n + 1];
    for u in 0..=b {
        best[n][m][u] = Some((0.0, 0, 0));
    }
    for i in (0..n).rev() {
        for j in 0..=m {
            for u in 0..=b {
                let mut choice: Option<(f64, usize, usize)> = None;
                for &(len, unseen) in &lat.edges[i][j] {
                    let Some(u2) = lat.next(i, j, u, len, unseen) else {
                        continue;
                    };
                    let Some((rest, _, _)) = best[i + 1][j + len][u2] else {
                        continue;
                    };
                    let cell = lat.cell(j, len);
                    let p = if unseen {
                        cfg.epsilon
                    } else {
                        probs.prob(&graphemes[i], &cell)
                    };
                    let score = rest + p.ln();
                    let better = match choice {
                        None => true,
                        Some((s, clen, _)) => {
                            let tol = 1e-9 * s.abs().max(1.0);
                            if score > s + tol {
                                true
                            } else if score < s - tol {
                                false
                            } else if len != clen {
                                len > clen
                            } else {
                                false
                            }
                        }
                    };
                    // cells of equal length starting at the same phoneme are
                    // the same string, so the length comparison settles ties
                    if better {
                        choice = Some((score, len, u2));
                    }
                }
                best[i][j][u] = choice;
            }
        }
    }
    let mut cells = Vec::with_capacity(n);
    let (mut j, mut u) = (0, b);
    for i in 0..n {
        let (_, len, u2) = best[i][j][u]?;
        cells.push(lat.cell(j, len));
        j += len;
        u = u2;
    }
    Some(cells)
}

/// Words left out of an aligned corpus, with the reason.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiscardReport {
    pub total: usize,
    pub discarded: Vec<(String, String)>,
}

impl DiscardReport {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.discarded.len() as f64 / self.total as f64
        }
    }
}

/// Aligns every `(word, gold)` pair of `lexicon` with the system output of
/// `pipeline` and with its gold transcription.
pub fn build_training_corpus(
    lexicon: &[(String, String)],
    pipeline: &Pipeline,
    cfg: &AlignConfig,
) -> (Vec<AlignedEntry>, Allowables, DiscardReport) {
    let mut report = DiscardReport {
        total: lexicon.len(),
        ..Default::default()
    };
    let mut systems = Vec::new();
    for (word, _) in lexicon {
        match align_system_output(word, pipeline) {
            Ok((g, s)) => systems.push(Some((g, s))),
            Err(e) => {
                report.discarded.push((word.clone(), e.to_string()));
                systems.push(None);
            }
        }
    }
    let pairs: Vec<(Vec<String>, String)> = lexicon
        .iter()
        .zip(&systems)
        .filter_map(|((_, gold), s)| s.as_ref().map(|(g, _)| (g.clone(), gold.clone())))
        .collect();
    let allowables = derive_allowables(pipeline.rule_file(), &pairs, cfg);
    let probs = estimate_mapping_probs(&pairs, &allowables, cfg);
    let mut corpus = Vec::new();
    for ((word, gold), sys) in lexicon.iter().zip(systems) {
        let Some((graphemes, system)) = sys else { continue };
        match best_alignment(&graphemes, gold, &probs, &allowables, cfg) {
            Some(cells) => corpus.push(AlignedEntry {
                word: word.clone(),
                graphemes,
                system,
                gold: cells,
            }),
            None => report
                .discarded
                .push((word.clone(), AlignError::Unalignable(word.clone()).to_string())),
        }
    }
    (corpus, allowables, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn allow(pairs: &[(&str, &[&str])]) -> Allowables {
        pairs
            .iter()
            .map(|(g, cs)| (g.to_string(), cs.iter().map(|c| c.to_string()).collect()))
            .collect()
    }

    #[test]
    fn splits_converted_stage() {
        assert_eq!(split_cells("#-a+l-b-@+s+@++#"), v(&["a", "l", "b", "@", "s", "@", ""]));
    }

    #[test]
    fn single_alignment() {
        let a = allow(&[("a", &["a"])]);
        assert_eq!(enumerate_alignments(&v(&["a"]), "a", &a, 1, 3), vec![v(&["a"])]);
        assert!(enumerate_alignments(&v(&["a"]), "zz", &a, 0, 3).is_empty());
        assert_eq!(enumerate_alignments(&v(&["a"]), "zz", &a, 1, 3), vec![v(&["zz"])]);
    }

    #[test]
    fn probabilities_by_construction() {
        // three words aligning e with @ and one with E
        let a = allow(&[("e", &["@", "E"]), ("t", &["t"])]);
        let corpus: Vec<(Vec<String>, String)> = vec![
            (v(&["t", "e"]), "t@".into()),
            (v(&["e", "t"]), "@t".into()),
            (v(&["e"]), "@".into()),
            (v(&["e", "t"]), "Et".into()),
        ];
        let cfg = AlignConfig::default();
        let p = estimate_mapping_probs(&corpus, &a, &cfg);
        assert!((p.prob("e", "@") - 0.75).abs() < 1e-12);
        assert!((p.prob("e", "E") - 0.25).abs() < 1e-12);
        assert_eq!(p.prob("t", "t"), 1.0);
        assert_eq!(p.prob("t", "q"), 1e-6);
    }

    #[test]
    fn best_prefers_higher_product() {
        // x|ks versus xk|s
        let a = allow(&[("x", &["k", "ks"]), ("s", &["s", ""])]);
        let g = v(&["x", "s"]);
        let train: Vec<(Vec<String>, String)> = vec![
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "ks".into()),
            (v(&["x"]), "k".into()),
            (v(&["s"]), "s".into()),
            (v(&["s"]), "".into()),
        ];
        let cfg = AlignConfig::default();
        let p = estimate_mapping_probs(&train, &a, &cfg);
        assert!((p.prob("x", "ks") / p.prob("x", "k") - 10.0).abs() < 1e-9);
        assert_eq!(best_alignment(&g, "ks", &p, &a, &cfg).unwrap(), v(&["ks", ""]));
    }

    #[test]
    fn ties_prefer_longer_first_cell() {
        let a = allow(&[("a", &["", "x"]), ("b", &["", "x"])]);
        let train = vec![(v(&["a", "b"]), "x".to_string())];
        let cfg = AlignConfig::default();
        let p = estimate_mapping_probs(&train, &a, &cfg);
        assert_eq!(
            best_alignment(&v(&["a", "b"]), "x", &p, &a, &cfg).unwrap(),
            v(&["x", ""])
        );
    }
}
