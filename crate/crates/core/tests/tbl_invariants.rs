use g2pfst::align::{build_training_corpus, AlignConfig, AlignedEntry};
use g2pfst::g2p::{parse_rule_file, Pipeline};
use g2pfst::synth::planted_lexicon;
use g2pfst::tbl::{
    extended_templates, generate_candidates, standard_templates, train, CandidateMode, Template, TrainConfig,
    TrainMode, TrainState,
};
use rand::SeedableRng;

mod common;
use common::tbl_run_invariants;
use rand_chacha::ChaCha8Rng;

fn corpus(words: usize, rules: usize, seed: u64) -> Vec<AlignedEntry> {
    let s = planted_lexicon(words, rules, 5, seed);
    let p = Pipeline::new(&parse_rule_file(&s.rules).unwrap()).unwrap();
    build_training_corpus(&s.lexicon, &p, &AlignConfig::default()).0
}

fn check_run(corpus: &[AlignedEntry], templates: &[Template], cfg: &TrainConfig) {
    if let Err(e) = tbl_run_invariants(corpus, templates, cfg) {
        panic!("{e}");
    }
}

#[test]
fn brill_invariants() {
    check_run(&corpus(400, 8, 1), &standard_templates(), &TrainConfig::default());
}

#[test]
fn lazy_invariants() {
    let cfg = TrainConfig {
        mode: TrainMode::Lazy(3),
        seed: 9,
        ..Default::default()
    };
    check_run(&corpus(400, 8, 2), &standard_templates(), &cfg);
}

#[test]
fn lazy_extended_invariants() {
    let cfg = TrainConfig {
        mode: TrainMode::Lazy(5),
        threshold: 3,
        ..Default::default()
    };
    check_run(&corpus(300, 6, 3), &extended_templates(), &cfg);
}

#[test]
fn sampled_candidates_correct_their_site() {
    let c = corpus(200, 5, 4);
    let st = TrainState::new(&c, &standard_templates());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (e, i) in st.error_sites() {
        let cur = st.current_cells(e);
        for r in generate_candidates(&st, (e, i), CandidateMode::Sample(5), &mut rng) {
            assert!(r.matches(&c[e].graphemes, &cur, i), "{r}");
            assert_eq!(r.to, c[e].gold[i]);
        }
    }
}

#[test]
fn exhaustive_first_rule_dominates() {
    for seed in 0..5 {
        let c = corpus(200, 6, 10 + seed);
        let first = |mode| {
            let cfg = TrainConfig {
                mode,
                seed,
                max_rules: Some(1),
                ..Default::default()
            };
            train(&c, &standard_templates(), &cfg)
                .rules
                .first()
                .map_or(0, |r| r.score)
        };
        assert!(first(TrainMode::Brill) >= first(TrainMode::Lazy(2)));
    }
}

#[test]
fn injected_systematic_errors_score_exactly() {
    // 40 cells where e:@ should be E before s
    let mk = |sys: &str, gold: &str| AlignedEntry {
        word: "bes".into(),
        graphemes: vec!["b".into(), "e".into(), "s".into()],
        system: vec!["b".into(), sys.into(), "s".into()],
        gold: vec!["b".into(), gold.into(), "s".into()],
    };
    let mut c: Vec<AlignedEntry> = (0..40).map(|_| mk("@", "E")).collect();
    c.extend((0..10).map(|_| mk("o", "o")));
    let out = train(&c, &standard_templates(), &TrainConfig::default());
    assert_eq!(out.rules.len(), 1);
    assert_eq!(out.rules[0].score, 40);
}
