use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Cond, TblRule, Template, OUTSIDE};
use crate::align::AlignedEntry;

const MAX_CONDS: usize = 4;
const UNUSED: u32 = u32::MAX;
/// Interned id of [`OUTSIDE`].
const BOUND: u32 = 0;

#[derive(Debug, Clone, Default)]
struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn new() -> Self {
        let mut i = Interner::default();
        i.intern(OUTSIDE);
        i
    }

    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_string());
        self.ids.insert(s.to_string(), id);
        id
    }

    fn get(&self, s: &str) -> Option<u32> {
        self.ids.get(s).copied()
    }

    fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }
}

/// A rule over interned values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Key {
    template: u32,
    seg: u32,
    from: u32,
    to: u32,
    vals: [u32; MAX_CONDS],
}

/// Training data with the layer being corrected.
#[derive(Debug, Clone)]
pub struct TrainState {
    templates: Vec<Template>,
    interner: Interner,
    graphemes: Vec<Vec<u32>>,
    current: Vec<Vec<u32>>,
    gold: Vec<Vec<u32>>,
    errors: usize,
}

impl TrainState {
    /// Starts from the system cells of `corpus`.
    pub fn new(corpus: &[AlignedEntry], templates: &[Template]) -> Self {
        assert!(
            templates.iter().all(|t| t.conds.len() <= MAX_CONDS),
            "at most {MAX_CONDS} conditions"
        );
        let mut interner = Interner::new();
        let mut layer = |xs: &[String]| xs.iter().map(|x| interner.intern(x)).collect::<Vec<u32>>();
        let graphemes: Vec<Vec<u32>> = corpus.iter().map(|e| layer(&e.graphemes)).collect();
        let current: Vec<Vec<u32>> = corpus.iter().map(|e| layer(&e.system)).collect();
        let gold: Vec<Vec<u32>> = corpus.iter().map(|e| layer(&e.gold)).collect();
        let mut st = TrainState {
            templates: templates.to_vec(),
            interner,
            graphemes,
            current,
            gold,
            errors: 0,
        };
        st.errors = st.count_errors();
        st
    }

    fn count_errors(&self) -> usize {
        self.current
            .iter()
            .zip(&self.gold)
            .map(|(c, g)| c.iter().zip(g).filter(|(a, b)| a != b).count())
            .sum()
    }

    /// Number of cells whose current value differs from gold.
    pub fn errors(&self) -> usize {
        self.errors
    }

    /// Positions `(entry, cell)` whose current value differs from gold.
    pub fn error_sites(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (e, (c, g)) in self.current.iter().zip(&self.gold).enumerate() {
            for i in 0..c.len() {
                if c[i] != g[i] {
                    out.push((e, i));
                }
            }
        }
        out
    }

    /// The current cells of entry `e`.
    pub fn current_cells(&self, e: usize) -> Vec<String> {
        self.current[e]
            .iter()
            .map(|&x| self.interner.name(x).to_string())
            .collect()
    }

    fn layer(&self, e: usize, on_graphemes: bool) -> &[u32] {
        if on_graphemes {
            &self.graphemes[e]
        } else {
            &self.current[e]
        }
    }

    fn value_at(layer: &[u32], i: usize, off: i8) -> u32 {
        let j = i as isize + off as isize;
        if j < 0 || j as usize >= layer.len() {
            BOUND
        } else {
            layer[j as usize]
        }
    }

    /// Distinct values a condition can be bound to at position `i`.
    fn values(&self, e: usize, i: usize, c: Cond) -> Vec<u32> {
        let layer = self.layer(e, c.on_graphemes());
        let mut out: Vec<u32> = c.offsets().map(|o| Self::value_at(layer, i, o)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn matches(&self, key: &Key, e: usize, i: usize) -> bool {
        if self.graphemes[e][i] != key.seg || self.current[e][i] != key.from {
            return false;
        }
        let t = &self.templates[key.template as usize];
        t.conds.iter().zip(key.vals).all(|(&c, v)| {
            let layer = self.layer(e, c.on_graphemes());
            c.offsets().any(|o| Self::value_at(layer, i, o) == v)
        })
    }

    /// Every instantiation of template `t` that rewrites site `(e, i)` to
    /// its gold value.
    fn instantiate(&self, t: &Template, e: usize, i: usize, out: &mut Vec<Key>) {
        let base = Key {
            template: t.id,
            seg: self.graphemes[e][i],
            from: self.current[e][i],
            to: self.gold[e][i],
            vals: [UNUSED; MAX_CONDS],
        };
        let options: Vec<Vec<u32>> = t.conds.iter().map(|&c| self.values(e, i, c)).collect();
        let mut idx = vec![0usize; options.len()];
        loop {
            let mut k = base;
            for (n, o) in options.iter().enumerate() {
                k.vals[n] = o[idx[n]];
            }
            out.push(k);
            // odometer over the option lists
            let mut n = options.len();
            loop {
                if n == 0 {
                    return;
                }
                n -= 1;
                idx[n] += 1;
                if idx[n] < options[n].len() {
                    break;
                }
                idx[n] = 0;
            }
        }
    }

    fn site_candidates(&self, e: usize, i: usize) -> Vec<Key> {
        let mut out = Vec::new();
        if self.current[e][i] == self.gold[e][i] {
            return out;
        }
        for t in &self.templates {
            self.instantiate(t, e, i, &mut out);
        }
        out
    }

    /// Positions by (segment, current value).
    fn index(&self) -> HashMap<(u32, u32), Vec<(u32, u32)>> {
        let mut idx: HashMap<(u32, u32), Vec<(u32, u32)>> = HashMap::new();
        for (e, (g, c)) in self.graphemes.iter().zip(&self.current).enumerate() {
            for i in 0..g.len() {
                idx.entry((g[i], c[i])).or_default().push((e as u32, i as u32));
            }
        }
        idx
    }

    fn score_key(&self, key: &Key, bucket: &[(u32, u32)]) -> i64 {
        let mut score = 0i64;
        for &(e, i) in bucket {
            let (e, i) = (e as usize, i as usize);
            if self.matches(key, e, i) {
                let gold = self.gold[e][i];
                if gold == key.to {
                    score += 1;
                } else if gold == key.from {
                    score -= 1;
                }
            }
        }
        score
    }

    fn apply_key(&mut self, key: &Key, bucket: &[(u32, u32)]) -> usize {
        let hits: Vec<(usize, usize)> = bucket
            .iter()
            .map(|&(e, i)| (e as usize, i as usize))
            .filter(|&(e, i)| self.matches(key, e, i))
            .collect();
        for &(e, i) in &hits {
            let gold = self.gold[e][i];
            if self.current[e][i] != gold {
                self.errors -= 1;
            }
            self.current[e][i] = key.to;
            if key.to != gold {
                self.errors += 1;
            }
        }
        hits.len()
    }

    fn to_rule(&self, key: &Key, score: i64) -> TblRule {
        let t = &self.templates[key.template as usize];
        let name = |x: u32| self.interner.name(x).to_string();
        TblRule {
            template: key.template,
            from: name(key.from),
            to: name(key.to),
            segment: name(key.seg),
            conds: t.conds.iter().zip(key.vals).map(|(&c, v)| (c, name(v))).collect(),
            score,
        }
    }

    /// Applies `rule` to the current layer; returns the number of rewritten
    /// cells.
    pub fn apply_rule(&mut self, rule: &TblRule) -> usize {
        let Some(key) = self.to_key(rule) else { return 0 };
        let to = self.interner.intern(&rule.to);
        let key = Key { to, ..key };
        let bucket = self.index().remove(&(key.seg, key.from)).unwrap_or_default();
        self.apply_key(&key, &bucket)
    }

    /// Interns a rule; `None` if it mentions a value absent from the corpus
    /// (and thus matches nothing) or does not fit the templates.
    fn to_key(&self, rule: &TblRule) -> Option<Key> {
        let t = self.templates.get(rule.template as usize)?;
        if t.conds.len() != rule.conds.len() || t.conds.iter().zip(&rule.conds).any(|(a, (b, _))| a != b) {
            return None;
        }
        let mut vals = [UNUSED; MAX_CONDS];
        for (n, (_, v)) in rule.conds.iter().enumerate() {
            vals[n] = self.interner.get(v)?;
        }
        Some(Key {
            template: rule.template,
            seg: self.interner.get(&rule.segment)?,
            from: self.interner.get(&rule.from)?,
            to: self.interner.get(&rule.to).unwrap_or(UNUSED),
            vals,
        })
    }
}

/// How candidate rules are drawn from an error site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateMode {
    Exhaustive,
    /// `k` draws with replacement, duplicates removed.
    Sample(usize),
}

/// Rules that would correct the error at `site`.
pub fn generate_candidates(
    state: &TrainState,
    site: (usize, usize),
    mode: CandidateMode,
    rng: &mut ChaCha8Rng,
) -> Vec<TblRule> {
    let all = state.site_candidates(site.0, site.1);
    let keys = match mode {
        CandidateMode::Exhaustive => all,
        CandidateMode::Sample(k) => sample(&all, k, rng),
    };
    keys.iter().map(|k| state.to_rule(k, 0)).collect()
}

fn sample(all: &[Key], k: usize, rng: &mut ChaCha8Rng) -> Vec<Key> {
    if all.is_empty() {
        return Vec::new();
    }
    let mut picked: Vec<Key> = Vec::with_capacity(k);
    for _ in 0..k {
        let key = all[rng.gen_range(0..all.len())];
        if !picked.contains(&key) {
            picked.push(key);
        }
    }
    picked
}

/// Corrections minus newly introduced errors if `rule` were applied.
pub fn score_rule(rule: &TblRule, state: &TrainState) -> i64 {
    let Some(key) = state.to_key(rule) else { return 0 };
    let mut bucket = Vec::new();
    for (e, (g, c)) in state.graphemes.iter().zip(&state.current).enumerate() {
        for i in 0..g.len() {
            if g[i] == key.seg && c[i] == key.from {
                bucket.push((e as u32, i as u32));
            }
        }
    }
    state.score_key(&key, &bucket)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// Every instantiation at every error site is a candidate.
    Brill,
    /// `k` sampled instantiations per error site.
    Lazy(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainConfig {
    pub mode: TrainMode,
    /// Smallest score a rule needs to be accepted.
    pub threshold: i64,
    pub seed: u64,
    pub max_rules: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: TrainMode::Brill,
            threshold: 2,
            seed: 0,
            max_rules: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub iteration: usize,
    pub rule: TblRule,
    pub score: i64,
    /// Cell errors after applying the rule.
    pub errors: usize,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub rules: Vec<TblRule>,
    pub log: Vec<LogEntry>,
    pub initial_errors: usize,
    pub final_errors: usize,
}

impl TrainOutput {
    /// Tab-separated: iteration, rule, score, training errors, elapsed ms.
    pub fn format_log(&self) -> String {
        let mut out = String::from("iteration\trule\tscore\ttrainingErrors\telapsedMs\n");
        for l in &self.log {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                l.iteration, l.rule, l.score, l.errors, l.elapsed_ms
            ));
        }
        out
    }
}

/// Higher score first, then lower template id, then serialization.
fn better(state: &TrainState, a: (i64, &Key), b: (i64, &Key)) -> bool {
    match a.0.cmp(&b.0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match a.1.template.cmp(&b.1.template) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => state.to_rule(a.1, a.0).to_string() < state.to_rule(b.1, b.0).to_string(),
        },
    }
}

/// Greedy transformation-based learning on `corpus`, starting from its
/// system cells.
pub fn train(corpus: &[AlignedEntry], templates: &[Template], cfg: &TrainConfig) -> TrainOutput {
    let start = Instant::now();
    let mut state = TrainState::new(corpus, templates);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let initial_errors = state.errors();
    let mut rules = Vec::new();
    let mut log = Vec::new();
    let threshold = cfg.threshold.max(1);
    while cfg.max_rules.is_none_or(|m| rules.len() < m) {
        let sites = state.error_sites();
        if sites.is_empty() {
            break;
        }
        let index = state.index();
        let empty = Vec::new();
        let bucket = |k: &Key| index.get(&(k.seg, k.from)).unwrap_or(&empty);
        let mut best: Option<(i64, Key)> = None;
        let consider = |state: &TrainState, key: Key, best: &mut Option<(i64, Key)>| {
            let score = state.score_key(&key, bucket(&key));
            if best.as_ref().is_none_or(|(s, b)| better(state, (score, &key), (*s, b))) {
                *best = Some((score, key));
            }
        };
        match cfg.mode {
            TrainMode::Brill => {
                // corrections counted at generation bound each score from above
                let mut upper: HashMap<Key, i64> = HashMap::new();
                for &(e, i) in &sites {
                    for k in state.site_candidates(e, i) {
                        *upper.entry(k).or_default() += 1;
                    }
                }
                let mut cands: Vec<(i64, Key)> = upper.into_iter().map(|(k, n)| (n, k)).collect();
                cands.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                for (up, key) in cands {
                    if up < threshold || best.as_ref().is_some_and(|(s, _)| up < *s) {
                        break;
                    }
                    consider(&state, key, &mut best);
                }
            }
            TrainMode::Lazy(k) => {
                let mut seen: HashSet<Key> = HashSet::new();
                let mut cands = Vec::new();
                for &(e, i) in &sites {
                    for key in sample(&state.site_candidates(e, i), k, &mut rng) {
                        if seen.insert(key) {
                            cands.push(key);
                        }
                    }
                }
                for key in cands {
                    consider(&state, key, &mut best);
                }
            }
        }
        let Some((score, key)) = best else { break };
        if score < threshold {
            break;
        }
        let bucket = index.get(&(key.seg, key.from)).cloned().unwrap_or_default();
        let before = state.errors();
        state.apply_key(&key, &bucket);
        debug_assert_eq!(before as i64 - state.errors() as i64, score);
        let rule = state.to_rule(&key, score);
        log.push(LogEntry {
            iteration: rules.len() + 1,
            rule: rule.clone(),
            score,
            errors: state.errors(),
            elapsed_ms: start.elapsed().as_millis(),
        });
        rules.push(rule);
    }
    TrainOutput {
        rules,
        log,
        initial_errors,
        final_errors: state.errors(),
    }
}

/// The most frequent gold cell of every grapheme (ties: smallest string).
pub fn frequency_baseline(corpus: &[AlignedEntry]) -> BTreeMap<String, String> {
    let mut counts: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    for e in corpus {
        for (g, c) in e.graphemes.iter().zip(&e.gold) {
            *counts.entry(g).or_default().entry(c).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(g, cells)| {
            let (best, _) = cells
                .into_iter()
                .fold(("", 0usize), |acc, (c, n)| if n > acc.1 { (c, n) } else { acc });
            (g.to_string(), best.to_string())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::standard_templates;
    use super::*;

    fn entry(g: &[&str], s: &[&str], gold: &[&str]) -> AlignedEntry {
        let v = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        AlignedEntry {
            word: g.concat(),
            graphemes: v(g),
            system: v(s),
            gold: v(gold),
        }
    }

    #[test]
    fn counts_corrections_minus_breakage() {
        // e:@ -> E everywhere: 3 fixes, 1 breakage
        let corpus = vec![
            entry(&["e"], &["@"], &["E"]),
            entry(&["e"], &["@"], &["E"]),
            entry(&["e"], &["@"], &["E"]),
            entry(&["e"], &["@"], &["@"]),
        ];
        let st = TrainState::new(&corpus, &standard_templates());
        let rule = TblRule {
            template: 0,
            from: "@".into(),
            to: "E".into(),
            segment: "e".into(),
            conds: vec![],
            score: 0,
        };
        assert_eq!(score_rule(&rule, &st), 2);
        let nothing = TblRule {
            segment: "zz".into(),
            ..rule
        };
        assert_eq!(score_rule(&nothing, &st), 0);
    }

    #[test]
    fn single_systematic_error() {
        let corpus: Vec<AlignedEntry> = (0..5)
            .flat_map(|_| {
                [
                    entry(
                        &["b", "e", "ss", "e", "n"],
                        &["b", "@", "s", "@", ""],
                        &["b", "E", "s", "@", ""],
                    ),
                    entry(&["b", "e", "t"], &["b", "@", "t"], &["b", "@", "t"]),
                ]
            })
            .collect();
        let out = train(&corpus, &standard_templates(), &TrainConfig::default());
        assert_eq!(out.rules.len(), 1);
        assert_eq!(out.final_errors, 0);
        assert_eq!(out.rules[0].to_string(), "t=2 @->E seg=e cond=p:+1:s score=5");
    }

    #[test]
    fn candidates_of_a_site() {
        let corpus = vec![entry(&["b", "e", "ss"], &["b", "@", "s"], &["b", "E", "s"])];
        let st = TrainState::new(&corpus, &standard_templates());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let all = generate_candidates(&st, (0, 1), CandidateMode::Exhaustive, &mut rng);
        assert_eq!(all.len(), 22);
        assert!(all
            .iter()
            .any(|r| r.to_string() == "t=2 @->E seg=e cond=p:+1:s score=0"));
        let many = generate_candidates(&st, (0, 1), CandidateMode::Sample(10_000), &mut rng);
        assert_eq!(many.len(), 22);
        assert!(generate_candidates(&st, (0, 0), CandidateMode::Exhaustive, &mut rng).is_empty());
    }

    #[test]
    fn baseline_takes_most_frequent() {
        let corpus = vec![
            entry(&["e"], &["x"], &["@"]),
            entry(&["e"], &["x"], &["@"]),
            entry(&["e"], &["x"], &["@"]),
            entry(&["e", "q"], &["x", "x"], &["E", "k"]),
            entry(&["a"], &["x"], &["b"]),
            entry(&["a"], &["x"], &["a"]),
        ];
        let b = frequency_baseline(&corpus);
        assert_eq!(b["e"], "@");
        assert_eq!(b["q"], "k");
        assert_eq!(b["a"], "a");
    }
}
