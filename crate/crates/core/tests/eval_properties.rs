use std::collections::{BTreeSet, HashMap};

use g2pfst::eval::{edit_distance, evaluate, evaluate_with, fold_partition, Averaging};
use proptest::prelude::*;

fn s(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!['a', 'b', 'c', '@', 'ɛ']), 0..=max)
        .prop_map(|v| v.into_iter().collect())
}

fn nonempty(max: usize) -> impl Strategy<Value = String> {
    s(max).prop_filter("non-empty gold", |g| !g.is_empty())
}

/// Memoized recursive definition, written independently of the DP.
fn reference_distance(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() || b.is_empty() {
        return a.len() + b.len();
    }
    if let Some(&d) = memo.get(&(a.len(), b.len())) {
        return d;
    }
    let (x, y) = (a.len() - 1, b.len() - 1);
    let d = (reference_distance(&a[..x], &b[..y], memo) + usize::from(a[x] != b[y]))
        .min(reference_distance(&a[..x], b, memo) + 1)
        .min(reference_distance(a, &b[..y], memo) + 1);
    memo.insert((a.len(), b.len()), d);
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn edit_distance_is_a_metric(a in s(8), b in s(8), c in s(8)) {
        let (ab, ba) = (edit_distance(&a, &b), edit_distance(&b, &a));
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(edit_distance(&a, &a), 0);
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(edit_distance(&a, &c) <= ab + edit_distance(&b, &c));
        let (ac, bc): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        prop_assert_eq!(ab, reference_distance(&ac, &bc, &mut HashMap::new()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn accuracy_ignores_order(pairs in prop::collection::vec((s(6), nonempty(6)), 1..20), rot in 0usize..20) {
        let mut shuffled = pairs.clone();
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        for avg in [Averaging::Micro, Averaging::Macro] {
            let x = evaluate_with(&pairs, avg, false).unwrap();
            let y = evaluate_with(&shuffled, avg, false).unwrap();
            prop_assert!((x.phoneme_accuracy - y.phoneme_accuracy).abs() < 1e-12);
            prop_assert_eq!(x.word_accuracy, y.word_accuracy);
            prop_assert!((0.0..=1.0).contains(&x.phoneme_accuracy));
        }
    }

    #[test]
    fn perfect_predictions_score_one(golds in prop::collection::vec(nonempty(6), 1..20)) {
        let pairs: Vec<_> = golds.iter().map(|g| (g.clone(), g.clone())).collect();
        let r = evaluate(&pairs).unwrap();
        prop_assert_eq!(r.word_accuracy, 1.0);
        prop_assert_eq!(r.phoneme_accuracy, 1.0);
        prop_assert_eq!(r.total_edit_distance, 0);
    }

    #[test]
    fn folds_partition_the_words(n in 2usize..200, k in 2usize..10, seed in any::<u64>()) {
        prop_assume!(n >= k);
        let folds = fold_partition(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let all: BTreeSet<usize> = folds.iter().flatten().copied().collect();
        prop_assert_eq!(all.len(), n);
        prop_assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), n);
        let (lo, hi) = (folds.iter().map(Vec::len).min().unwrap(), folds.iter().map(Vec::len).max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert_eq!(fold_partition(n, k, seed).unwrap(), folds);
    }
}

#[test]
fn micro_and_macro_differ() {
    let pairs = vec![
        ("ab".to_string(), "ab".to_string()),
        ("x".to_string(), "abcd".to_string()),
    ];
    let micro = evaluate_with(&pairs, Averaging::Micro, false).unwrap();
    let mac = evaluate_with(&pairs, Averaging::Macro, false).unwrap();
    assert!((micro.phoneme_accuracy - 2.0 / 6.0).abs() < 1e-12);
    assert!((mac.phoneme_accuracy - 0.5).abs() < 1e-12);
    assert_eq!(micro.word_accuracy, 0.5);
}

#[test]
fn accuracy_is_floored_at_zero() {
    let r = evaluate(&[("abcdefg".to_string(), "x".to_string())]).unwrap();
    assert_eq!(r.phoneme_accuracy, 0.0);
    assert!(evaluate(&[("a".to_string(), String::new())]).is_err());
    assert!(fold_partition(3, 5, 0).is_err());
}
