//! Subset construction and partition-refinement minimization.
//!
//! Transducers are handled through their pair-symbol view: each
//! `(input, output)` label pair is one letter and `ε:ε` is the only epsilon.
//! The result is the unique minimal trim DFA for that pair language.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::fst::{Arc, Fst, Label, StateId, EPSILON};

type Pair = (Label, Label);

fn eps_closure(f: &Fst, set: &mut Vec<StateId>) {
    let mut seen: Vec<bool> = vec![false; f.num_states()];
    for &s in set.iter() {
        seen[s as usize] = true;
    }
    let mut stack = set.clone();
    while let Some(s) = stack.pop() {
        for a in f.arcs(s) {
            if a.ilabel == EPSILON && a.olabel == EPSILON && !seen[a.next as usize] {
                seen[a.next as usize] = true;
                set.push(a.next);
                stack.push(a.next);
            }
        }
    }
    set.sort_unstable();
    set.dedup();
}

/// Subset construction over pair symbols. Returns a complete description of
/// the reachable DFA: transitions, finals, start = 0.
fn subset(f: &Fst) -> (Vec<Vec<(Pair, usize)>>, Vec<bool>) {
    let mut start = vec![f.start()];
    eps_closure(f, &mut start);
    let mut ids: HashMap<Vec<StateId>, usize> = HashMap::new();
    ids.insert(start.clone(), 0);
    let mut sets = vec![start];
    let mut trans: Vec<Vec<(Pair, usize)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let mut moves: BTreeMap<Pair, Vec<StateId>> = BTreeMap::new();
        for &s in &sets[id] {
            for a in f.arcs(s) {
                if a.ilabel == EPSILON && a.olabel == EPSILON {
                    continue;
                }
                moves.entry((a.ilabel, a.olabel)).or_default().push(a.next);
            }
        }
        for (pair, mut targets) in moves {
            targets.sort_unstable();
            targets.dedup();
            eps_closure(f, &mut targets);
            let next = match ids.get(&targets) {
                Some(&n) => n,
                None => {
                    let n = sets.len();
                    ids.insert(targets.clone(), n);
                    sets.push(targets);
                    trans.push(Vec::new());
                    queue.push_back(n);
                    n
                }
            };
            trans[id].push((pair, next));
        }
    }
    let finals = sets.iter().map(|set| set.iter().any(|&s| f.is_final(s))).collect();
    (trans, finals)
}

/// Determinizes and minimizes `f` over its pair-symbol view.
///
/// The result is trim (no dead state) and has the fewest states of any DFA
/// for the same pair language; its deterministic and minimal flags are set.
pub fn determinize_minimize(f: &Fst) -> Fst {
    let (trans, finals) = subset(f);
    let n = trans.len();

    // drop states that cannot reach a final state
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, ts) in trans.iter().enumerate() {
        for &(_, t) in ts {
            rev[t].push(s);
        }
    }
    let mut live = finals.clone();
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| finals[s]).collect();
    while let Some(s) = queue.pop_front() {
        for &p in &rev[s] {
            if !live[p] {
                live[p] = true;
                queue.push_back(p);
            }
        }
    }
    if !live[0] {
        let mut empty = Fst::new();
        empty.mark_minimal_dfa();
        return empty;
    }

    // Moore refinement on live states; missing transitions go to the
    // implicit dead class.
    let live_states: Vec<usize> = (0..n).filter(|&s| live[s]).collect();
    let mut class: Vec<usize> = vec![usize::MAX; n];
    for &s in &live_states {
        class[s] = usize::from(finals[s]);
    }
    let mut num_classes = 0;
    loop {
        let mut sigs: HashMap<(usize, Vec<(Pair, usize)>), usize> = HashMap::new();
        let mut next_class = vec![usize::MAX; n];
        for &s in &live_states {
            let mut sig: Vec<(Pair, usize)> = trans[s]
                .iter()
                .filter(|&&(_, t)| live[t])
                .map(|&(p, t)| (p, class[t]))
                .collect();
            sig.sort_unstable();
            let len = sigs.len();
            let c = *sigs.entry((class[s], sig)).or_insert(len);
            next_class[s] = c;
        }
        let stable = sigs.len() == num_classes;
        num_classes = sigs.len();
        class = next_class;
        if stable {
            break;
        }
    }

    // renumber classes in BFS order from the start for a canonical layout
    let mut order: Vec<usize> = vec![usize::MAX; num_classes];
    let mut rep: Vec<usize> = vec![usize::MAX; num_classes];
    for &s in &live_states {
        if rep[class[s]] == usize::MAX {
            rep[class[s]] = s;
        }
    }
    let mut out = Fst::new();
    order[class[0]] = 0;
    let mut queue = VecDeque::from([class[0]]);
    let mut next_id = 1;
    let mut arcs: Vec<Vec<(Pair, usize)>> = vec![Vec::new(); num_classes];
    while let Some(c) = queue.pop_front() {
        let s = rep[c];
        let mut ts: Vec<(Pair, usize)> = trans[s]
            .iter()
            .filter(|&&(_, t)| live[t])
            .map(|&(p, t)| (p, class[t]))
            .collect();
        ts.sort_unstable();
        for &(_, tc) in &ts {
            if order[tc] == usize::MAX {
                order[tc] = next_id;
                next_id += 1;
                queue.push_back(tc);
            }
        }
        arcs[c] = ts;
    }
    for _ in 1..next_id {
        out.add_state();
    }
    for c in 0..num_classes {
        if order[c] == usize::MAX {
            continue;
        }
        let src = order[c] as StateId;
        if finals[rep[c]] {
            out.set_final(src, true);
        }
        for &((i, o), tc) in &arcs[c] {
            out.add_arc(src, Arc::new(i, o, order[tc] as StateId));
        }
    }
    out.mark_minimal_dfa();
    out
}

/// A deterministic acceptor with constant-time transitions, used by
/// constructions that simulate automata directly.
#[derive(Debug, Clone)]
pub(crate) struct Dfa {
    trans: Vec<HashMap<Label, usize>>,
    finals: Vec<bool>,
}

impl Dfa {
    pub const START: usize = 0;

    /// Builds from an acceptor; `None` if `f` has distinct input and output
    /// labels on some arc.
    pub fn from_acceptor(f: &Fst) -> Option<Dfa> {
        if !f.is_acceptor() {
            return None;
        }
        let d = determinize_minimize(f);
        let trans = d
            .states()
            .map(|s| d.arcs(s).iter().map(|a| (a.ilabel, a.next as usize)).collect())
            .collect();
        let finals = d.states().map(|s| d.is_final(s)).collect();
        Some(Dfa { trans, finals })
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn step(&self, s: usize, l: Label) -> Option<usize> {
        self.trans[s].get(&l).copied()
    }

    pub fn is_final(&self, s: usize) -> bool {
        self.finals[s]
    }
}
