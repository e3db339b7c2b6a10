//! Synthetic lexicons whose gold transcriptions differ from a toy rule
//! system only through planted correction rules, so that everything a
//! learner has to find is known and expressible by the templates.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tbl::{standard_templates, Cond, TblRule, OUTSIDE};

const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const CONSONANTS: [&str; 10] = ["b", "d", "k", "l", "m", "n", "p", "r", "s", "t"];

#[derive(Debug, Clone)]
pub struct Synthetic {
    /// Rule file of the toy system: every letter is a grapheme mapped to
    /// itself.
    pub rules: String,
    pub lexicon: Vec<(String, String)>,
    /// The planted corrections, in the order they produced the gold layer.
    pub planted: Vec<TblRule>,
}

/// Rule file of the toy system.
pub fn toy_rule_file() -> String {
    let mut out = String::from("# one grapheme per letter, each pronounced as written\n");
    for g in VOWELS.iter().chain(&CONSONANTS) {
        out.push_str(&format!("default {g} -> {g}\n"));
    }
    out
}

fn random_word(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut w = Vec::new();
    for _ in 0..rng.gen_range(2..=3) {
        if rng.gen_bool(0.8) {
            w.push(CONSONANTS.choose(rng).unwrap().to_string());
        }
        w.push(VOWELS.choose(rng).unwrap().to_string());
        if rng.gen_bool(0.3) {
            w.push(CONSONANTS.choose(rng).unwrap().to_string());
        }
    }
    w
}

fn at(xs: &[String], i: usize, o: i8) -> String {
    let j = i as isize + o as isize;
    if j < 0 || j as usize >= xs.len() {
        OUTSIDE.to_string()
    } else {
        xs[j as usize].clone()
    }
}

/// `words` distinct words and `rules` planted rules, each firing at least
/// `min_fires` times when it is planted.
pub fn planted_lexicon(words: usize, rules: usize, min_fires: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut graphemes: Vec<Vec<String>> = Vec::new();
    while graphemes.len() < words {
        let w = random_word(&mut rng);
        if seen.insert(w.concat()) {
            graphemes.push(w);
        }
    }
    // the toy system pronounces every letter as written
    let mut layer: Vec<Vec<String>> = graphemes.clone();
    let templates = standard_templates();
    let mut planted: Vec<TblRule> = Vec::new();
    let mut attempts = 0;
    while planted.len() < rules {
        attempts += 1;
        assert!(
            attempts < 100_000,
            "cannot plant {rules} rules with {min_fires} matches each"
        );
        let t = &templates[rng.gen_range(1..templates.len())];
        let e = rng.gen_range(0..words);
        let i = rng.gen_range(0..graphemes[e].len());
        let from = layer[e][i].clone();
        // only letters still pronounced as written are rewritten, to an
        // upper-case phoneme
        if from != graphemes[e][i] {
            continue;
        }
        let conds: Vec<(Cond, String)> = t
            .conds
            .iter()
            .map(|&c| {
                let o = *c.offsets().start();
                let src = if c.on_graphemes() { &graphemes[e] } else { &layer[e] };
                (c, at(src, i, o))
            })
            .collect();
        let rule = TblRule {
            template: t.id,
            to: from.to_uppercase(),
            from,
            segment: graphemes[e][i].clone(),
            conds,
            score: 0,
        };
        if planted
            .iter()
            .any(|p| p.segment == rule.segment && p.template == rule.template && p.conds == rule.conds)
        {
            continue;
        }
        let fires: usize = graphemes
            .iter()
            .zip(&layer)
            .map(|(g, l)| (0..g.len()).filter(|&k| rule.matches(g, l, k)).count())
            .sum();
        if fires < min_fires {
            continue;
        }
        for (g, l) in graphemes.iter().zip(layer.iter_mut()) {
            rule.apply(g, l);
        }
        planted.push(TblRule {
            score: fires as i64,
            ..rule
        });
    }
    let lexicon = graphemes
        .iter()
        .zip(&layer)
        .map(|(g, l)| (g.concat(), l.concat()))
        .collect();
    Synthetic {
        rules: toy_rule_file(),
        lexicon,
        planted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_planted() {
        let a = planted_lexicon(300, 5, 5, 7);
        let b = planted_lexicon(300, 5, 5, 7);
        assert_eq!(a.lexicon, b.lexicon);
        assert_eq!(a.planted, b.planted);
        assert_eq!(a.planted.len(), 5);
        assert!(a.lexicon.iter().any(|(w, p)| w != p));
        assert!(a.lexicon.iter().all(|(w, p)| w.to_lowercase() == p.to_lowercase()));
    }
}
