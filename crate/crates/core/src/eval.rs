//! Accuracy metrics and the cross-validation harness.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::align::{align_system_output, build_training_corpus, AlignConfig, AlignedEntry};
use crate::g2p::{G2pError, Pipeline};
use crate::tbl::{apply_rules, frequency_baseline, train, TblRule, Template, TrainConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("entry {0} has an empty gold transcription")]
    EmptyGold(usize),
    #[error("{words} words cannot be split into {folds} folds")]
    TooFewWords { words: usize, folds: usize },
}

/// Levenshtein distance over codepoints with unit costs.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// How phoneme accuracy is aggregated over words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Total distance over total gold length.
    #[default]
    Micro,
    /// Mean of the per-word accuracies.
    Macro,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordDetail {
    pub predicted: String,
    pub gold: String,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub word_accuracy: f64,
    pub phoneme_accuracy: f64,
    pub total_words: usize,
    pub total_gold_phonemes: usize,
    pub total_edit_distance: usize,
    pub per_word: Option<Vec<WordDetail>>,
}

/// Micro-averaged report over `(predicted, gold)` pairs.
pub fn evaluate(pairs: &[(String, String)]) -> Result<EvalReport, EvalError> {
    evaluate_with(pairs, Averaging::Micro, false)
}

pub fn evaluate_with(
    pairs: &[(String, String)],
    averaging: Averaging,
    per_word: bool,
) -> Result<EvalReport, EvalError> {
    let mut details = Vec::with_capacity(pairs.len());
    let mut correct = 0;
    let mut total_gold = 0;
    let mut total_dist = 0;
    let mut macro_sum = 0.0;
    for (i, (pred, gold)) in pairs.iter().enumerate() {
        let len = gold.chars().count();
        if len == 0 {
            return Err(EvalError::EmptyGold(i));
        }
        let d = edit_distance(pred, gold);
        correct += usize::from(pred == gold);
        total_gold += len;
        total_dist += d;
        macro_sum += (1.0 - d as f64 / len as f64).max(0.0);
        details.push(WordDetail {
            predicted: pred.clone(),
            gold: gold.clone(),
            distance: d,
        });
    }
    let n = pairs.len();
    let ratio = |num: f64, den: f64| if den == 0.0 { 1.0 } else { num / den };
    let phoneme_accuracy = match averaging {
        Averaging::Micro => (1.0 - ratio(total_dist as f64, total_gold as f64)).max(0.0),
        Averaging::Macro => ratio(macro_sum, n as f64),
    };
    Ok(EvalReport {
        word_accuracy: ratio(correct as f64, n as f64),
        phoneme_accuracy,
        total_words: n,
        total_gold_phonemes: total_gold,
        total_edit_distance: total_dist,
        per_word: per_word.then_some(details),
    })
}

impl EvalReport {
    /// Aligned plain-text summary.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<22}{:>10.1}\n{:<22}{:>10.1}\n{:<22}{:>10}\n{:<22}{:>10}\n{:<22}{:>10}\n",
            "word accuracy",
            100.0 * self.word_accuracy,
            "phoneme accuracy",
            100.0 * self.phoneme_accuracy,
            "words",
            self.total_words,
            "gold phonemes",
            self.total_gold_phonemes,
            "edit distance",
            self.total_edit_distance,
        );
        if let Some(details) = &self.per_word {
            out.push('\n');
            for d in details {
                out.push_str(&format!("{}\t{}\t{}\n", d.predicted, d.gold, d.distance));
            }
        }
        out
    }

    /// Header line and one row, tab-separated; per-word details follow
    /// after a blank line with their own header.
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "word_accuracy\tphoneme_accuracy\twords\tgold_phonemes\tedit_distance\n{:.4}\t{:.4}\t{}\t{}\t{}\n",
            self.word_accuracy,
            self.phoneme_accuracy,
            self.total_words,
            self.total_gold_phonemes,
            self.total_edit_distance
        );
        if let Some(details) = &self.per_word {
            out.push_str("\npredicted\tgold\tdistance\n");
            for d in details {
                out.push_str(&format!("{}\t{}\t{}\n", d.predicted, d.gold, d.distance));
            }
        }
        out
    }
}

/// What the corrections start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartLayer {
    /// The rule-based system output.
    #[default]
    System,
    /// Every grapheme's most frequent gold cell in the training data.
    Frequency,
}

#[derive(Debug, Clone)]
pub struct XvalConfig {
    pub folds: usize,
    pub seed: u64,
    pub align: AlignConfig,
    /// `None` evaluates the start layer without learning.
    pub train: Option<TrainConfig>,
    pub templates: Vec<Template>,
    pub start: StartLayer,
    /// Label of the results-table row.
    pub method: String,
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub report: EvalReport,
    pub rules: Vec<TblRule>,
    pub train_words: usize,
    pub discarded: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub method: String,
    pub folds: Vec<FoldResult>,
}

fn mean_std(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = xs.collect();
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl CrossValidation {
    pub fn phoneme_accuracy(&self) -> (f64, f64) {
        mean_std(self.folds.iter().map(|f| f.report.phoneme_accuracy))
    }

    pub fn word_accuracy(&self) -> (f64, f64) {
        mean_std(self.folds.iter().map(|f| f.report.word_accuracy))
    }

    /// Results-table header:
    /// method | training data | phoneme | word | induced rules | CPU time.
    pub fn table_header() -> String {
        format!(
            "{:<12} | {:>13} | {:>7} | {:>7} | {:>13} | {:>12}",
            "method", "training data", "phoneme", "word", "induced rules", "CPU time (s)"
        )
    }

    /// One results-table row with fold means.
    pub fn table_row(&self) -> String {
        let n = self.folds.len().max(1) as f64;
        let words = self.folds.iter().map(|f| f.train_words).sum::<usize>() as f64 / n;
        let rules = self.folds.iter().map(|f| f.rules.len()).sum::<usize>() as f64 / n;
        let secs = self.folds.iter().map(|f| f.elapsed.as_secs_f64()).sum::<f64>() / n;
        format!(
            "{:<12} | {:>13.0} | {:>7.1} | {:>7.1} | {:>13.0} | {:>12.1}",
            self.method,
            words,
            100.0 * self.phoneme_accuracy().0,
            100.0 * self.word_accuracy().0,
            rules,
            secs
        )
    }
}

impl fmt::Display for CrossValidation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, fold) in self.folds.iter().enumerate() {
            writeln!(
                f,
                "fold {}: phoneme {:.1} word {:.1} rules {} test words {} discarded {}",
                i + 1,
                100.0 * fold.report.phoneme_accuracy,
                100.0 * fold.report.word_accuracy,
                fold.rules.len(),
                fold.report.total_words,
                fold.discarded
            )?;
        }
        let (pm, ps) = self.phoneme_accuracy();
        let (wm, ws) = self.word_accuracy();
        writeln!(
            f,
            "mean: phoneme {:.1} ± {:.1} word {:.1} ± {:.1}",
            100.0 * pm,
            100.0 * ps,
            100.0 * wm,
            100.0 * ws
        )?;
        writeln!(f, "{}", Self::table_header())?;
        writeln!(f, "{}", self.table_row())
    }
}

/// Disjoint folds covering `0..n`, from a seeded shuffle.
pub fn fold_partition(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if folds < 2 || n < folds {
        return Err(EvalError::TooFewWords { words: n, folds });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((0..folds)
        .map(|k| idx[k * n / folds..(k + 1) * n / folds].to_vec())
        .collect())
}

/// The pipeline's transcription of `word` corrected by learned `rules`.
pub fn predict(word: &str, pipeline: &Pipeline, rules: &[TblRule]) -> Result<String, G2pError> {
    let (graphemes, cells) = align_system_output(word, pipeline)?;
    Ok(apply_rules(rules, &graphemes, &cells).concat())
}

/// The start layer cells of one word.
fn start_cells(
    word: &str,
    pipeline: &Pipeline,
    start: StartLayer,
    baseline: &BTreeMap<String, String>,
) -> Option<(Vec<String>, Vec<String>)> {
    let (graphemes, system) = align_system_output(word, pipeline).ok()?;
    let cells = match start {
        StartLayer::System => system,
        StartLayer::Frequency => graphemes
            .iter()
            .zip(system)
            .map(|(g, s)| baseline.get(g).cloned().unwrap_or(s))
            .collect(),
    };
    Some((graphemes, cells))
}

/// Trains on the training part of a split and evaluates on `test`. Test
/// words the pipeline cannot transcribe count as empty predictions.
pub fn run_split(
    train_lex: &[(String, String)],
    test_lex: &[(String, String)],
    pipeline: &Pipeline,
    cfg: &XvalConfig,
) -> Result<FoldResult, EvalError> {
    let started = Instant::now();
    let (mut corpus, _, report) = build_training_corpus(train_lex, pipeline, &cfg.align);
    let baseline = frequency_baseline(&corpus);
    if cfg.start == StartLayer::Frequency {
        for e in &mut corpus {
            relayer(e, &baseline);
        }
    }
    let rules = match &cfg.train {
        Some(tc) if !corpus.is_empty() => train(&corpus, &cfg.templates, tc).rules,
        _ => Vec::new(),
    };
    let elapsed = started.elapsed();
    let pairs: Vec<(String, String)> = test_lex
        .iter()
        .map(|(w, gold)| {
            let pred = start_cells(w, pipeline, cfg.start, &baseline)
                .map(|(g, cells)| apply_rules(&rules, &g, &cells).concat())
                .unwrap_or_default();
            (pred, gold.clone())
        })
        .collect();
    Ok(FoldResult {
        report: evaluate(&pairs)?,
        rules,
        train_words: corpus.len(),
        discarded: report.discarded.len(),
        elapsed,
    })
}

fn relayer(e: &mut AlignedEntry, baseline: &BTreeMap<String, String>) {
    for (g, s) in e.graphemes.iter().zip(e.system.iter_mut()) {
        if let Some(b) = baseline.get(g) {
            *s = b.clone();
        }
    }
}

/// k-fold cross-validation: every fold is held out once while the rest is
/// aligned and trained on.
pub fn cross_validate(
    lexicon: &[(String, String)],
    pipeline: &Pipeline,
    cfg: &XvalConfig,
) -> Result<CrossValidation, EvalError> {
    let parts = fold_partition(lexicon.len(), cfg.folds, cfg.seed)?;
    let mut folds = Vec::new();
    for (k, test_idx) in parts.iter().enumerate() {
        let test: Vec<(String, String)> = test_idx.iter().map(|&i| lexicon[i].clone()).collect();
        let train_lex: Vec<(String, String)> = parts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .flat_map(|(_, p)| p.iter().map(|&i| lexicon[i].clone()))
            .collect();
        folds.push(run_split(&train_lex, &test, pipeline, cfg)?);
    }
    Ok(CrossValidation {
        method: cfg.method.clone(),
        folds,
    })
}
