//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use g2pfst::align::{AlignedEntry, Allowables};
use g2pfst::fsa::{union, Arc, Fst, Regex, StateId, EPSILON};
use g2pfst::tbl::{apply_rules, format_rules, parse_rules, score_rule, train, Template, TrainConfig, TrainState};
use proptest::prelude::*;

// ---- replace instances ----

pub const ALPHA: [char; 4] = ['a', 'b', 'c', 'd'];

pub fn word(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(0..ALPHA.len(), 0..=max).prop_map(|v| v.into_iter().map(|i| ALPHA[i]).collect())
}

pub fn targets() -> impl Strategy<Value = BTreeMap<String, String>> {
    prop::collection::btree_map(word(3), word(3), 0..=3)
}

/// A context: empty, a short string, or a disjunction of two short strings.
pub fn context() -> impl Strategy<Value = Regex> {
    prop_oneof![
        Just(Regex::Empty),
        word(2).prop_map(|w| Regex::string(&w)),
        (word(2), word(2)).prop_map(|(a, b)| Regex::Union(vec![Regex::string(&a), Regex::string(&b)])),
    ]
}

pub fn target_fst(t: &BTreeMap<String, String>) -> Fst {
    union(&t.iter().map(|(k, v)| Fst::from_pair(k, v)).collect::<Vec<_>>())
}

pub fn sigma() -> Vec<u32> {
    ALPHA.iter().map(|&c| c as u32).collect()
}

// ---- automata over {a, b} ----

/// Every string over {a, b} up to length `max`.
pub fn ab_words(max: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max {
        frontier = frontier
            .iter()
            .flat_map(|w| ['a', 'b'].map(|c| format!("{w}{c}")))
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Random acceptor over {a, b} with between 1 and `n` states and epsilon arcs.
pub fn random_acceptor(n: usize) -> impl Strategy<Value = Fst> {
    (1..=n).prop_flat_map(|n| {
        let arcs = prop::collection::vec((0..n, 0..3u8, 0..n), 0..(3 * n + 1));
        (arcs, prop::collection::vec(any::<bool>(), n)).prop_map(move |(arcs, finals)| {
            let mut f = Fst::new();
            for _ in 1..n {
                f.add_state();
            }
            for (s, l, t) in arcs {
                let l = match l {
                    0 => EPSILON,
                    1 => 'a' as u32,
                    _ => 'b' as u32,
                };
                f.add_arc(s as StateId, Arc::new(l, l, t as StateId));
            }
            for (s, fin) in finals.into_iter().enumerate() {
                f.set_final(s as StateId, fin);
            }
            f
        })
    })
}

fn closure(f: &Fst, set: BTreeSet<StateId>) -> BTreeSet<StateId> {
    let mut out = set.clone();
    let mut stack: Vec<StateId> = set.into_iter().collect();
    while let Some(s) = stack.pop() {
        for a in f.arcs(s) {
            if a.ilabel == EPSILON && out.insert(a.next) {
                stack.push(a.next);
            }
        }
    }
    out
}

/// States of the minimal trimmed DFA for acceptor `f` over {a, b}: subset
/// construction, removal of dead subsets, then Moore refinement into
/// Myhill-Nerode classes. An empty language counts as one state.
pub fn minimal_state_count(f: &Fst) -> usize {
    let start = closure(f, BTreeSet::from([f.start()]));
    let mut ids: HashMap<BTreeSet<StateId>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut subsets = vec![start];
    let mut delta: Vec<[Option<usize>; 2]> = Vec::new();
    let mut i = 0;
    while i < subsets.len() {
        let mut row = [None; 2];
        for (k, c) in ['a', 'b'].into_iter().enumerate() {
            let next: BTreeSet<StateId> = subsets[i]
                .iter()
                .flat_map(|&s| f.arcs(s).iter().filter(|a| a.ilabel == c as u32).map(|a| a.next))
                .collect();
            if next.is_empty() {
                continue;
            }
            let next = closure(f, next);
            let id = *ids.entry(next.clone()).or_insert_with(|| {
                subsets.push(next);
                subsets.len() - 1
            });
            row[k] = Some(id);
        }
        delta.push(row);
        i += 1;
    }
    let finals: Vec<bool> = subsets.iter().map(|s| s.iter().any(|&q| f.is_final(q))).collect();
    // live = can reach a final subset
    let mut live = finals.clone();
    loop {
        let mut changed = false;
        for s in 0..subsets.len() {
            if !live[s] && delta[s].iter().flatten().any(|&t| live[t]) {
                live[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let states: Vec<usize> = (0..subsets.len()).filter(|&s| live[s]).collect();
    if states.is_empty() {
        return 1;
    }
    let mut class: HashMap<usize, usize> = states.iter().map(|&s| (s, usize::from(finals[s]))).collect();
    let mut count = states.iter().map(|&s| class[&s]).collect::<BTreeSet<_>>().len();
    loop {
        let sig = |s: usize| {
            let step = |t: Option<usize>| t.filter(|t| live[*t]).map(|t| class[&t]);
            (class[&s], step(delta[s][0]), step(delta[s][1]))
        };
        let mut renumber: BTreeMap<(usize, Option<usize>, Option<usize>), usize> = BTreeMap::new();
        let mut next = HashMap::new();
        for &s in &states {
            let n = renumber.len();
            next.insert(s, *renumber.entry(sig(s)).or_insert(n));
        }
        class = next;
        if renumber.len() == count {
            return count;
        }
        count = renumber.len();
    }
}

// ---- alignment instances ----

pub const GRAPHEMES: [&str; 4] = ["a", "b", "ch", "ie"];
pub const PHONES: [char; 3] = ['a', 'b', 'x'];

pub fn phones(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(0..PHONES.len(), 0..=max).prop_map(|v| v.into_iter().map(|i| PHONES[i]).collect())
}

pub fn allowables() -> impl Strategy<Value = Allowables> {
    prop::collection::vec(prop::collection::btree_set(phones(2), 0..4), GRAPHEMES.len())
        .prop_map(|sets| GRAPHEMES.iter().map(|g| g.to_string()).zip(sets).collect())
}

pub fn graphemes(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(0..GRAPHEMES.len(), 0..=max)
        .prop_map(|v| v.into_iter().map(|i| GRAPHEMES[i].to_string()).collect())
}

/// Every way to cut `gold` into `n` contiguous parts.
fn compositions(gold: &[char], n: usize) -> Vec<Vec<String>> {
    if n == 0 {
        return if gold.is_empty() { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for k in 0..=gold.len() {
        for mut rest in compositions(&gold[k..], n - 1) {
            rest.insert(0, gold[..k].iter().collect());
            out.push(rest);
        }
    }
    out
}

/// Alignments by exhaustive splitting: every cut of `gold` into one cell
/// per grapheme, keeping those with at most `max_unseen` cells outside the
/// allowables, each of at most `max_unseen_len` phonemes.
pub fn brute_force_alignments(
    graphemes: &[String],
    gold: &str,
    a: &Allowables,
    max_unseen: usize,
    max_unseen_len: usize,
) -> BTreeSet<Vec<String>> {
    let chars: Vec<char> = gold.chars().collect();
    compositions(&chars, graphemes.len())
        .into_iter()
        .filter(|cells| {
            let mut unseen = 0;
            for (g, c) in graphemes.iter().zip(cells) {
                if !a.get(g).is_some_and(|s| s.contains(c)) {
                    if c.chars().count() > max_unseen_len {
                        return false;
                    }
                    unseen += 1;
                }
            }
            unseen <= max_unseen
        })
        .collect()
}

// ---- transformation-based learning ----

fn cell_errors(corpus: &[AlignedEntry], cells: impl Fn(&AlignedEntry) -> Vec<String>) -> usize {
    corpus
        .iter()
        .map(|e| cells(e).iter().zip(&e.gold).filter(|(a, b)| a != b).count())
        .sum()
}

/// Trains twice and checks the learner's bookkeeping against replay:
/// errors fall by at least the threshold per rule, every logged score equals
/// the change observed when the rule is applied to a fresh state, applying
/// the rule list word by word gives the final error count, and the rule
/// list is byte-identical across runs and survives serialization.
pub fn tbl_run_invariants(corpus: &[AlignedEntry], templates: &[Template], cfg: &TrainConfig) -> Result<usize, String> {
    let out = train(corpus, templates, cfg);
    if out.rules.is_empty() {
        return Err("no rules learned".into());
    }
    let mut prev = out.initial_errors;
    for l in &out.log {
        if l.score < cfg.threshold || l.errors >= prev || ((prev - l.errors) as i64) < cfg.threshold {
            return Err(format!(
                "iteration {}: {} -> {} errors, score {}",
                l.iteration, prev, l.errors, l.score
            ));
        }
        prev = l.errors;
    }
    let mut state = TrainState::new(corpus, templates);
    for l in &out.log {
        let before = state.errors();
        let predicted = score_rule(&l.rule, &state);
        state.apply_rule(&l.rule);
        let observed = before as i64 - state.errors() as i64;
        if predicted != l.score || observed != l.score || state.errors() != l.errors {
            return Err(format!(
                "{}: logged {}, rescored {}, observed {}",
                l.rule, l.score, predicted, observed
            ));
        }
    }
    let replay = cell_errors(corpus, |e| apply_rules(&out.rules, &e.graphemes, &e.system));
    if replay != out.final_errors {
        return Err(format!("replay gives {replay} errors, log says {}", out.final_errors));
    }
    let text = format_rules(&out.rules);
    if format_rules(&train(corpus, templates, cfg).rules) != text {
        return Err("rule lists differ between runs".into());
    }
    if parse_rules(&text).map_err(|e| e.to_string())? != out.rules {
        return Err("rule list does not survive serialization".into());
    }
    Ok(out.rules.len())
}
