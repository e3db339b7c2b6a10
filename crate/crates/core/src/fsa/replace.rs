//! Leftmost longest-match contextual replacement.
//!
//! The rewrite is a left-to-right scan. At each free position the scanner
//! looks for the longest string of the target's domain that starts there,
//! whose preceding input ends with a match of the left context and whose
//! following input starts with a match of the right context. A non-empty
//! match is rewritten by the target and the scan resumes after it. If only
//! the empty string matches, the target's empty-input outputs are inserted
//! once and the next symbol is copied. Otherwise the symbol is copied.
//!
//! Deciding "longest match with a right context" needs unbounded lookahead,
//! so the transducer is built as a bimachine folded into one machine: a
//! deterministic right-to-left automaton summarises each suffix (which
//! target-domain states can still reach the end of a valid match, and
//! whether the right context holds), and the left-to-right scanner guesses
//! that summary at every position and verifies it symbol by symbol. Because
//! the right-to-left automaton is deterministic, exactly one guess survives
//! on every input, so no auxiliary marker symbols are needed.

use std::collections::HashMap;

use super::dfa::Dfa;
use super::fst::{Arc, Fst, Label, StateId, EPSILON};
use super::ops::concat;
use super::{determinize_minimize, FsaError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Lookahead {
    /// right-context automaton state, reading the suffix reversed
    right: Option<usize>,
    /// domain states with a non-empty continuation to a valid match end
    cont: Vec<bool>,
}

/// The right-to-left summary automaton.
struct Summary {
    states: Vec<Lookahead>,
    /// `preds[b]`: `(a, b')` such that reading `a` from `b'` leads to `b`,
    /// i.e. the pairs (next symbol, summary of the suffix after it).
    preds: Vec<Vec<(Label, usize)>>,
}

impl Summary {
    const END: usize = 0;

    fn build(domain: &Dfa, right_rev: &Dfa, sigma: &[Label]) -> Summary {
        let nd = domain.num_states();
        let first = Lookahead {
            right: Some(Dfa::START),
            cont: vec![false; nd],
        };
        let mut states = vec![first.clone()];
        let mut ids: HashMap<Lookahead, usize> = HashMap::from([(first, 0)]);
        let mut preds: Vec<Vec<(Label, usize)>> = vec![Vec::new()];
        let mut i = 0;
        while i < states.len() {
            let cur = states[i].clone();
            let rc = cur.right.is_some_and(|r| right_rev.is_final(r));
            for &a in sigma {
                let right = cur.right.and_then(|r| right_rev.step(r, a));
                let cont = (0..nd)
                    .map(|q| {
                        domain
                            .step(q, a)
                            .is_some_and(|q2| cur.cont[q2] || (rc && domain.is_final(q2)))
                    })
                    .collect();
                let next = Lookahead { right, cont };
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = states.len();
                        ids.insert(next.clone(), id);
                        states.push(next);
                        preds.push(Vec::new());
                        id
                    }
                };
                preds[id].push((a, i));
            }
            i += 1;
        }
        Summary { states, preds }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Mode {
    Free,
    /// emitting the outputs of an empty match; target state
    Insert(StateId),
    /// empty match emitted, next symbol must be copied
    AfterInsert,
    /// inside a non-empty match: domain state, target state
    Match(usize, StateId),
}

type Key = (Option<usize>, usize, Mode);

/// Builds the leftmost longest-match replacement transducer.
///
/// `target` is any transducer; `left` and `right` must be acceptors. `sigma`
/// is the alphabet of symbols that may occur in the input.
pub fn replace(target: &Fst, left: &Fst, right: &Fst, sigma: &[Label]) -> Result<Fst, FsaError> {
    if !left.is_acceptor() || !right.is_acceptor() {
        return Err(FsaError::NonAcceptor("replacement context"));
    }
    if target.has_productive_epsilon_cycle() {
        return Err(FsaError::UnboundedInsertion);
    }
    let mut sigma: Vec<Label> = sigma.iter().copied().filter(|&l| l != EPSILON).collect();
    sigma.sort_unstable();
    sigma.dedup();
    let sigma_star = Fst::sigma_star(sigma.iter().copied());

    let domain = Dfa::from_acceptor(&target.project_input()).expect("projection is an acceptor");
    let left_dfa = Dfa::from_acceptor(&concat(&[sigma_star.clone(), left.clone()])).expect("context checked above");
    let right_rev = Dfa::from_acceptor(&concat(&[sigma_star, right.reverse()])).expect("context checked above");
    let summary = Summary::build(&domain, &right_rev, &sigma);

    // target arcs split by input label
    let tgt = determinize_minimize(target);
    let mut tgt_eps: Vec<Vec<Arc>> = vec![Vec::new(); tgt.num_states()];
    let mut tgt_sym: Vec<HashMap<Label, Vec<Arc>>> = vec![HashMap::new(); tgt.num_states()];
    for s in tgt.states() {
        for a in tgt.arcs(s) {
            if a.ilabel == EPSILON {
                tgt_eps[s as usize].push(*a);
            } else {
                tgt_sym[s as usize].entry(a.ilabel).or_default().push(*a);
            }
        }
    }
    // preds indexed by symbol for the match mode
    let preds_by_sym: Vec<HashMap<Label, Vec<usize>>> = summary
        .preds
        .iter()
        .map(|ps| {
            let mut m: HashMap<Label, Vec<usize>> = HashMap::new();
            for &(a, b) in ps {
                m.entry(a).or_default().push(b);
            }
            m
        })
        .collect();

    let left_ok = |l: Option<usize>| l.is_some_and(|l| left_dfa.is_final(l));
    let left_step = |l: Option<usize>, a: Label| l.and_then(|l| left_dfa.step(l, a));

    let mut out = Fst::new();
    let mut ids: HashMap<Key, StateId> = HashMap::new();
    let mut stack: Vec<(Key, StateId)> = Vec::new();
    fn intern(ids: &mut HashMap<Key, StateId>, key: Key, out: &mut Fst, stack: &mut Vec<(Key, StateId)>) -> StateId {
        *ids.entry(key).or_insert_with(|| {
            let id = out.add_state();
            stack.push((key, id));
            id
        })
    }
    for b in 0..summary.states.len() {
        let id = intern(&mut ids, (Some(Dfa::START), b, Mode::Free), &mut out, &mut stack);
        out.add_arc(0, Arc::new(EPSILON, EPSILON, id));
    }

    while let Some(((l, b, mode), src)) = stack.pop() {
        let look = &summary.states[b];
        let rc = look.right.is_some_and(|r| right_rev.is_final(r));
        let at_end = b == Summary::END;
        let mut arcs: Vec<(Label, Label, Key)> = Vec::new();
        match mode {
            Mode::Free => {
                let lok = left_ok(l);
                if lok && look.cont[Dfa::START] {
                    arcs.push((EPSILON, EPSILON, (l, b, Mode::Match(Dfa::START, tgt.start()))));
                } else if lok && rc && domain.is_final(Dfa::START) {
                    arcs.push((EPSILON, EPSILON, (l, b, Mode::Insert(tgt.start()))));
                } else {
                    if at_end {
                        out.set_final(src, true);
                    }
                    for &(a, b2) in &summary.preds[b] {
                        arcs.push((a, a, (left_step(l, a), b2, Mode::Free)));
                    }
                }
            }
            Mode::Insert(t) => {
                for arc in &tgt_eps[t as usize] {
                    arcs.push((EPSILON, arc.olabel, (l, b, Mode::Insert(arc.next))));
                }
                if tgt.is_final(t) {
                    arcs.push((EPSILON, EPSILON, (l, b, Mode::AfterInsert)));
                }
            }
            Mode::AfterInsert => {
                if at_end {
                    out.set_final(src, true);
                }
                for &(a, b2) in &summary.preds[b] {
                    arcs.push((a, a, (left_step(l, a), b2, Mode::Free)));
                }
            }
            Mode::Match(q, t) => {
                for arc in &tgt_eps[t as usize] {
                    arcs.push((EPSILON, arc.olabel, (l, b, Mode::Match(q, arc.next))));
                }
                if look.cont[q] {
                    for (&a, tarcs) in &tgt_sym[t as usize] {
                        let Some(q2) = domain.step(q, a) else { continue };
                        let Some(nexts) = preds_by_sym[b].get(&a) else { continue };
                        for &b2 in nexts {
                            for arc in tarcs {
                                arcs.push((a, arc.olabel, (left_step(l, a), b2, Mode::Match(q2, arc.next))));
                            }
                        }
                    }
                } else if rc && domain.is_final(q) && tgt.is_final(t) {
                    arcs.push((EPSILON, EPSILON, (l, b, Mode::Free)));
                }
            }
        }
        for (i, o, next) in arcs {
            let id = intern(&mut ids, next, &mut out, &mut stack);
            out.add_arc(src, Arc::new(i, o, id));
        }
    }
    Ok(determinize_minimize(&out.trim()))
}
