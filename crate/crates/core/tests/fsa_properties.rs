use std::collections::BTreeSet;

use g2pfst::fsa::{
    compile, compose, determinize_minimize, oracle_replace, oracle_replace_spans, replace_build, Arc, Fst, MacroEnv,
    EPSILON,
};
use proptest::prelude::*;

mod common;
use common::{ab_words, context, sigma, target_fst, targets, word};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn replace_matches_oracle(t in targets(), l in context(), r in context(), inputs in prop::collection::vec(word(10), 1..5)) {
        let env = MacroEnv::new();
        let lf = compile(&l, &env).unwrap();
        let rf = compile(&r, &env).unwrap();
        let fst = replace_build(&target_fst(&t), &lf, &rf, &sigma()).unwrap();
        for input in inputs {
            let expected = oracle_replace(&t, &l, &r, &input).unwrap();
            prop_assert_eq!(fst.apply(&input), BTreeSet::from([expected]), "input {:?} targets {:?} l {:?} r {:?}", input, t, l, r);
        }
    }

    #[test]
    fn oracle_spans_never_overlap(t in targets(), l in context(), r in context(), input in word(10)) {
        let (_, spans) = oracle_replace_spans(&t, &l, &r, &input, &MacroEnv::new()).unwrap();
        for w in spans.windows(2) {
            prop_assert!(w[0].1 <= w[1].0, "{:?}", spans);
            // an empty span is never followed by another span at the same position
            prop_assert!(w[0].0 < w[1].0);
        }
    }
}

/// Random automaton over {a, b} with `n` states, including epsilon arcs but
/// no epsilon-input cycle that emits output.
fn random_fst(n: usize) -> impl Strategy<Value = Fst> {
    let arcs = prop::collection::vec((0..n, 0..3u8, 0..3u8, 0..n), 0..(2 * n + 2));
    (arcs, prop::collection::vec(any::<bool>(), n))
        .prop_map(move |(arcs, finals)| {
            let mut f = Fst::new();
            for _ in 1..n {
                f.add_state();
            }
            let lab = |x: u8| match x {
                0 => EPSILON,
                1 => 'a' as u32,
                _ => 'b' as u32,
            };
            for (s, i, o, t) in arcs {
                f.add_arc(s as u32, Arc::new(lab(i), lab(o), t as u32));
            }
            for (s, fin) in finals.into_iter().enumerate() {
                f.set_final(s as u32, fin);
            }
            f
        })
        .prop_filter("finite images", |f| !f.has_productive_epsilon_cycle())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn composition_is_associative(t in random_fst(3), u in random_fst(3), v in random_fst(3)) {
        let left = compose(&compose(&t, &u), &v);
        let right = compose(&t, &compose(&u, &v));
        for w in ab_words(4) {
            prop_assert_eq!(left.apply(&w), right.apply(&w));
        }
    }

    #[test]
    fn composition_law(t in random_fst(3), u in random_fst(3)) {
        let tu = compose(&t, &u);
        for w in ab_words(4) {
            let mut expected = BTreeSet::new();
            for mid in t.apply(&w) {
                expected.extend(u.apply(&mid));
            }
            prop_assert_eq!(tu.apply(&w), expected);
        }
    }

    #[test]
    fn minimization_preserves_relation(f in random_fst(5)) {
        let d = determinize_minimize(&f);
        for w in ab_words(5) {
            prop_assert_eq!(f.apply(&w), d.apply(&w));
        }
    }
}
