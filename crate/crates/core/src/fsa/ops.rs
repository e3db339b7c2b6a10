//! Rational operations on [`Fst`]s.

use std::collections::HashMap;

use super::fst::{Arc, Fst, Label, StateId, EPSILON};
use super::{determinize_minimize, FsaError};

/// Copies every state of `src` into `dst`, returning the id offset.
fn splice(dst: &mut Fst, src: &Fst) -> StateId {
    let base = dst.num_states() as StateId;
    for _ in 0..src.num_states() {
        dst.add_state();
    }
    for s in src.states() {
        for a in src.arcs(s) {
            dst.add_arc(base + s, Arc::new(a.ilabel, a.olabel, a.next + base));
        }
        if src.is_final(s) {
            dst.set_final(base + s, true);
        }
    }
    base
}

pub fn concat(parts: &[Fst]) -> Fst {
    let mut out = Fst::epsilon();
    let mut tails: Vec<StateId> = vec![0];
    for p in parts {
        let base = splice(&mut out, p);
        for &t in &tails {
            out.set_final(t, false);
            out.add_arc(t, Arc::new(EPSILON, EPSILON, base + p.start()));
        }
        tails = p.finals().map(|f| f + base).collect();
    }
    out
}

pub fn union(parts: &[Fst]) -> Fst {
    let mut out = Fst::new();
    for p in parts {
        let base = splice(&mut out, p);
        out.add_arc(0, Arc::new(EPSILON, EPSILON, base + p.start()));
    }
    out
}

pub fn optional(f: &Fst) -> Fst {
    union(&[Fst::epsilon(), f.clone()])
}

/// Kleene star.
pub fn closure(f: &Fst) -> Fst {
    let mut out = Fst::epsilon();
    let base = splice(&mut out, f);
    out.add_arc(0, Arc::new(EPSILON, EPSILON, base + f.start()));
    for fin in f.finals() {
        out.add_arc(fin + base, Arc::new(EPSILON, EPSILON, 0));
    }
    out
}

/// Labels accepted as single symbols if `f` denotes a set of length-one
/// strings, `None` otherwise.
fn as_symbol_set(f: &Fst) -> Option<Vec<(Label, Label)>> {
    let d = determinize_minimize(f);
    let start = d.start();
    if d.is_final(start) {
        return None;
    }
    let mut pairs = Vec::new();
    for a in d.arcs(start) {
        if !d.is_final(a.next) || !d.arcs(a.next).is_empty() || a.ilabel == EPSILON {
            return None;
        }
        pairs.push((a.ilabel, a.olabel));
    }
    Some(pairs)
}

/// `a` with strings of `b` freely interspersed.
pub fn ignore(a: &Fst, b: &Fst) -> Fst {
    let mut out = a.clone();
    if let Some(pairs) = as_symbol_set(b) {
        for s in a.states() {
            for &(i, o) in &pairs {
                out.add_arc(s, Arc::new(i, o, s));
            }
        }
        return out;
    }
    for s in a.states() {
        let base = splice(&mut out, b);
        for fin in b.finals() {
            out.set_final(fin + base, false);
            out.add_arc(fin + base, Arc::new(EPSILON, EPSILON, s));
        }
        out.add_arc(s, Arc::new(EPSILON, EPSILON, base + b.start()));
    }
    out
}

/// The transducer relating every string of `a` to every string of `b`.
///
/// Symbols are paired left to right; whichever side is longer continues
/// against epsilon, so each pair of strings has exactly one path.
pub fn cross_product(a: &Fst, b: &Fst) -> Result<Fst, FsaError> {
    if !a.is_acceptor() || !b.is_acceptor() {
        return Err(FsaError::NonAcceptor("cross-product operand"));
    }
    let a = determinize_minimize(a);
    let b = determinize_minimize(b);
    #[derive(Clone, Copy, PartialEq, Eq, Hash)]
    enum Phase {
        Zip,
        LeftOnly,
        RightOnly,
    }
    let mut out = Fst::new();
    let mut ids: HashMap<(StateId, StateId, Phase), StateId> = HashMap::new();
    let mut stack = vec![(a.start(), b.start(), Phase::Zip)];
    ids.insert(stack[0], 0);
    while let Some(key @ (qa, qb, phase)) = stack.pop() {
        let src = ids[&key];
        if a.is_final(qa) && b.is_final(qb) {
            out.set_final(src, true);
        }
        let mut moves: Vec<(Label, Label, (StateId, StateId, Phase))> = Vec::new();
        match phase {
            Phase::Zip => {
                for x in a.arcs(qa) {
                    for y in b.arcs(qb) {
                        moves.push((x.ilabel, y.ilabel, (x.next, y.next, Phase::Zip)));
                    }
                }
                if b.is_final(qb) {
                    for x in a.arcs(qa) {
                        moves.push((x.ilabel, EPSILON, (x.next, qb, Phase::LeftOnly)));
                    }
                }
                if a.is_final(qa) {
                    for y in b.arcs(qb) {
                        moves.push((EPSILON, y.ilabel, (qa, y.next, Phase::RightOnly)));
                    }
                }
            }
            Phase::LeftOnly => {
                for x in a.arcs(qa) {
                    moves.push((x.ilabel, EPSILON, (x.next, qb, Phase::LeftOnly)));
                }
            }
            Phase::RightOnly => {
                for y in b.arcs(qb) {
                    moves.push((EPSILON, y.ilabel, (qa, y.next, Phase::RightOnly)));
                }
            }
        }
        for (i, o, next) in moves {
            let id = *ids.entry(next).or_insert_with(|| {
                stack.push(next);
                out.add_state()
            });
            out.add_arc(src, Arc::new(i, o, id));
        }
    }
    Ok(out.trim())
}

/// Relation composition: `x` maps to `z` when `t` maps `x` to some `y` and
/// `u` maps that `y` to `z`.
///
/// Epsilon moves are sequenced so that, between two synchronised moves, all
/// of `t`'s output-epsilon moves precede `u`'s input-epsilon moves; this keeps
/// one path per alignment.
pub fn compose(t: &Fst, u: &Fst) -> Fst {
    let mut out = Fst::new();
    // filter: 0 = free, 1 = only u-side epsilon moves allowed
    let mut ids: HashMap<(StateId, StateId, u8), StateId> = HashMap::new();
    let first = (t.start(), u.start(), 0u8);
    ids.insert(first, 0);
    let mut stack = vec![first];
    // u's arcs indexed by input label
    let u_index: Vec<HashMap<Label, Vec<Arc>>> = u
        .states()
        .map(|s| {
            let mut m: HashMap<Label, Vec<Arc>> = HashMap::new();
            for a in u.arcs(s) {
                m.entry(a.ilabel).or_default().push(*a);
            }
            m
        })
        .collect();
    while let Some(key @ (p, q, filt)) = stack.pop() {
        let src = ids[&key];
        if t.is_final(p) && u.is_final(q) {
            out.set_final(src, true);
        }
        let mut moves: Vec<(Label, Label, (StateId, StateId, u8))> = Vec::new();
        for a in t.arcs(p) {
            if a.olabel == EPSILON {
                if filt == 0 {
                    moves.push((a.ilabel, EPSILON, (a.next, q, 0)));
                }
            } else if let Some(bs) = u_index[q as usize].get(&a.olabel) {
                for b in bs {
                    moves.push((a.ilabel, b.olabel, (a.next, b.next, 0)));
                }
            }
        }
        if let Some(bs) = u_index[q as usize].get(&EPSILON) {
            for b in bs {
                moves.push((EPSILON, b.olabel, (p, b.next, 1)));
            }
        }
        for (i, o, next) in moves {
            let id = *ids.entry(next).or_insert_with(|| {
                stack.push(next);
                out.add_state()
            });
            out.add_arc(src, Arc::new(i, o, id));
        }
    }
    out.trim()
}

/// Composes a cascade left to right, compacting after every step.
pub fn compose_all(stages: &[Fst]) -> Fst {
    let mut it = stages.iter();
    let Some(first) = it.next() else {
        return Fst::epsilon();
    };
    let mut acc = first.clone();
    for s in it {
        acc = determinize_minimize(&compose(&acc, s));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn lit(s: &str) -> Fst {
        Fst::from_str_acceptor(s)
    }

    #[test]
    fn union_and_concat() {
        let f = concat(&[union(&[lit("a"), lit("aa")]), lit("b")]);
        assert_eq!(f.apply("ab"), set(&["ab"]));
        assert_eq!(f.apply("aab"), set(&["aab"]));
        assert!(f.apply("b").is_empty());
    }

    #[test]
    fn ignore_with_symbol_set() {
        let f = ignore(&lit("ab"), &Fst::symbol_set(['-' as Label]));
        for s in ["ab", "a-b", "a--b", "-ab-"] {
            assert!(f.accepts(s), "{s}");
        }
        assert!(!f.accepts("a+b"));
    }

    #[test]
    fn ignore_with_multi_symbol_strings() {
        let f = ignore(&lit("ab"), &lit("xy"));
        assert!(f.accepts("axyb"));
        assert!(f.accepts("axyxyb"));
        assert!(!f.accepts("axb"));
    }

    #[test]
    fn cross_product_relates_all_pairs() {
        let f = cross_product(&union(&[lit("a"), lit("bb")]), &union(&[lit("x"), lit("")])).unwrap();
        assert_eq!(f.apply("a"), set(&["x", ""]));
        assert_eq!(f.apply("bb"), set(&["x", ""]));
        assert!(cross_product(&Fst::from_pair("a", "b"), &lit("c")).is_err());
    }

    #[test]
    fn compose_chains_relations() {
        let t = Fst::from_pair("ab", "c");
        let u = union(&[Fst::from_pair("c", "dd"), Fst::from_pair("c", "")]);
        assert_eq!(compose(&t, &u).apply("ab"), set(&["dd", ""]));
    }

    #[test]
    fn closure_repeats() {
        let f = closure(&lit("ab"));
        assert!(f.accepts(""));
        assert!(f.accepts("abab"));
        assert!(!f.accepts("aba"));
    }
}
