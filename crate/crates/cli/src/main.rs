use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use g2pfst::align::{build_training_corpus, format_aligned, parse_aligned, AlignConfig, Weighting};
use g2pfst::eval::{cross_validate, evaluate_with, predict, Averaging, StartLayer, XvalConfig};
use g2pfst::g2p::{parse_rule_file_with, GraphemeSet, Pipeline, DUTCH_RULES};
use g2pfst::lexicon::{format_lexicon, parse_lexicon};
use g2pfst::tbl::{
    extended_templates, format_rules, parse_rules, standard_templates, train, Template, TrainConfig, TrainMode,
};
use thiserror::Error;

#[derive(Parser)]
#[command(
    name = "g2pfst",
    version,
    about = "Finite-state grapheme-to-phoneme conversion and rule learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the rule pipeline into one transducer and print its dump.
    Compile {
        #[command(flatten)]
        rules: RuleArgs,
        /// Write the dump here instead of stdout; the size report goes to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Split words into graphemes.
    Segment {
        #[command(flatten)]
        rules: RuleArgs,
        #[command(flatten)]
        words: WordArgs,
    },
    /// Transcribe words with the rule pipeline.
    Transcribe {
        #[command(flatten)]
        rules: RuleArgs,
        #[command(flatten)]
        words: WordArgs,
        /// Print the segmented, marked, converted and cleaned strings.
        #[arg(long)]
        stages: bool,
    },
    /// Align a lexicon with the pipeline's output into a training corpus.
    Align {
        #[command(flatten)]
        rules: RuleArgs,
        /// Lexicon: word<TAB>phonemes per line.
        lexicon: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Cells outside the allowables permitted per word.
        #[arg(long, default_value_t = 1)]
        max_unseen: usize,
        /// Count every word once instead of every alignment.
        #[arg(long)]
        per_word: bool,
    },
    /// Learn correction rules from an aligned corpus.
    Train {
        /// Aligned corpus from `align`.
        corpus: PathBuf,
        #[command(flatten)]
        learn: LearnArgs,
        /// Learned rules go here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Training log (TSV).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Transcribe words and correct them with learned rules.
    Apply {
        #[command(flatten)]
        rules: RuleArgs,
        /// Learned rules from `train`.
        #[arg(long)]
        learned: PathBuf,
        /// Words, one per line; a lexicon works too (phonemes are ignored).
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score predictions against a gold lexicon.
    Eval {
        /// Predictions: word<TAB>phonemes.
        predictions: PathBuf,
        /// Gold lexicon: word<TAB>phonemes.
        gold: PathBuf,
        /// List every word with its edit distance.
        #[arg(long)]
        per_word: bool,
        /// Average phoneme accuracy per word instead of over all phonemes.
        #[arg(long = "macro")]
        macro_avg: bool,
        /// Machine-readable output.
        #[arg(long)]
        tsv: bool,
    },
    /// Cross-validate alignment, training and evaluation on a lexicon.
    Xval {
        #[command(flatten)]
        rules: RuleArgs,
        lexicon: PathBuf,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        learn: LearnArgs,
        /// Layer the learner starts from.
        #[arg(long, value_enum, default_value_t = Start::System)]
        start: Start,
        /// Evaluate the start layer without learning.
        #[arg(long)]
        no_train: bool,
    },
}

#[derive(Args)]
struct RuleArgs {
    /// Rule file; defaults to the shipped Dutch rules.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Grapheme inventory, one per line; defaults to the shipped Dutch
    /// inventory when no rule file is given.
    #[arg(long)]
    graphemes: Option<PathBuf>,
}

#[derive(Args)]
struct WordArgs {
    /// Words to process.
    words: Vec<String>,
    /// Read words from a file, one per line (first column of a lexicon).
    #[arg(long, conflicts_with = "words")]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    /// `brill` or `lazy:K`.
    #[arg(long, default_value = "brill", value_parser = parse_mode)]
    mode: TrainMode,
    /// Minimum net improvement for a rule to be accepted.
    #[arg(long, default_value_t = 2)]
    threshold: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Templates::Std)]
    templates: Templates,
    /// Stop after this many rules.
    #[arg(long)]
    max_rules: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Templates {
    Std,
    Ext,
}

#[derive(Clone, Copy, ValueEnum)]
enum Start {
    System,
    Frequency,
}

fn parse_mode(s: &str) -> Result<TrainMode, String> {
    match s.split_once(':') {
        None if s == "brill" => Ok(TrainMode::Brill),
        Some(("lazy", k)) => match k.parse::<usize>() {
            Ok(k) if k > 0 => Ok(TrainMode::Lazy(k)),
            _ => Err(format!("`{k}` is not a positive sample count")),
        },
        _ => Err("expected `brill` or `lazy:K`".into()),
    }
}

impl LearnArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            mode: self.mode,
            threshold: self.threshold,
            seed: self.seed,
            max_rules: self.max_rules,
        }
    }

    fn templates(&self) -> Vec<Template> {
        match self.templates {
            Templates::Std => standard_templates(),
            Templates::Ext => extended_templates(),
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    /// A data error; `message` may start with the library's `line N` prefix,
    /// which is folded into `path:N:`.
    #[error("{}", locate(path, message))]
    Data { path: String, message: String },
    #[error("{0}")]
    Other(String),
}

fn locate(path: &str, message: &str) -> String {
    if let Some(rest) = message.strip_prefix("line ") {
        let digits = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if digits > 0 {
            let (line, tail) = rest.split_at(digits);
            if let Some(msg) = tail.strip_prefix(": ") {
                return format!("{path}:{line}: {msg}");
            }
            if let Some(col) = tail.strip_prefix(", column ") {
                let d = col.find(|c: char| !c.is_ascii_digit()).unwrap_or(col.len());
                if let Some(msg) = col[d..].strip_prefix(": ") {
                    return format!("{path}:{line}:{}: {msg}", &col[..d]);
                }
            }
        }
    }
    format!("{path}: {message}")
}

fn data(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Other(e.to_string())),
    }
}

fn pipeline(args: &RuleArgs) -> Result<Pipeline, CliError> {
    let inventory = match (&args.graphemes, &args.rules) {
        (Some(p), _) => Some(GraphemeSet::parse(&read(p)?).map_err(|e| data(p, e))?),
        (None, None) => Some(GraphemeSet::dutch()),
        (None, Some(_)) => None,
    };
    let (name, text) = match &args.rules {
        Some(p) => (p.clone(), read(p)?),
        None => (PathBuf::from("<shipped Dutch rules>"), DUTCH_RULES.to_string()),
    };
    let rf = parse_rule_file_with(&text, inventory.as_ref()).map_err(|e| data(&name, e))?;
    Pipeline::new(&rf).map_err(|e| data(&name, e))
}

fn lexicon(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    parse_lexicon(&read(path)?).map_err(|e| data(path, e))
}

/// Words from the command line, or the first column of `--input`.
fn words(args: &WordArgs) -> Result<Vec<(String, String)>, CliError> {
    match &args.input {
        Some(p) => word_list(p),
        None if args.words.is_empty() => Err(CliError::Other("no words given".into())),
        None => Ok(args
            .words
            .iter()
            .map(|w| (w.clone(), "<command line>".to_string()))
            .collect()),
    }
}

/// Each word paired with a `path:line` label for diagnostics.
fn word_list(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    Ok(read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            let w = l.split('\t').next().unwrap_or_default().trim().to_string();
            (w, format!("{}:{}", path.display(), i + 1))
        })
        .collect())
}

fn word_error(origin: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Other(format!("{origin}: {e}"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compile { rules, output } => {
            let f = pipeline(&rules)?.compose();
            let size = format!("states {} transitions {}\n", f.num_states(), f.num_arcs());
            match output {
                Some(p) => {
                    emit(Some(&p), &f.dump())?;
                    emit(None, &size)
                }
                None => {
                    emit(None, &f.dump())?;
                    eprint!("{size}");
                    Ok(())
                }
            }
        }
        Command::Segment { rules, words: w } => {
            let p = pipeline(&rules)?;
            let mut out = String::new();
            for (word, origin) in words(&w)? {
                out.push_str(&p.segment(&word).map_err(|e| word_error(&origin, e))?);
                out.push('\n');
            }
            emit(None, &out)
        }
        Command::Transcribe {
            rules,
            words: w,
            stages,
        } => {
            let p = pipeline(&rules)?;
            let mut out = String::new();
            for (i, (word, origin)) in words(&w)?.into_iter().enumerate() {
                if stages {
                    if i > 0 {
                        out.push('\n');
                    }
                    out.push_str(
                        &p.transcribe_stages(&word)
                            .map_err(|e| word_error(&origin, e))?
                            .to_string(),
                    );
                } else {
                    out.push_str(&p.transcribe(&word).map_err(|e| word_error(&origin, e))?);
                    out.push('\n');
                }
            }
            emit(None, &out)
        }
        Command::Align {
            rules,
            lexicon: path,
            output,
            max_unseen,
            per_word,
        } => {
            let p = pipeline(&rules)?;
            let lex = lexicon(&path)?;
            let cfg = AlignConfig {
                max_unseen,
                weighting: if per_word {
                    Weighting::PerWord
                } else {
                    Weighting::PerAlignment
                },
                ..Default::default()
            };
            let (corpus, _, report) = build_training_corpus(&lex, &p, &cfg);
            emit(output.as_deref(), &format_aligned(&corpus))?;
            eprintln!(
                "aligned {} of {} words; discarded {} ({:.1}%)",
                corpus.len(),
                report.total,
                report.discarded.len(),
                100.0 * report.rate()
            );
            for (w, reason) in &report.discarded {
                eprintln!("discarded\t{w}\t{reason}");
            }
            Ok(())
        }
        Command::Train {
            corpus,
            learn,
            output,
            log,
        } => {
            let entries = parse_aligned(&read(&corpus)?).map_err(|e| data(&corpus, e))?;
            let out = train(&entries, &learn.templates(), &learn.config());
            emit(output.as_deref(), &format_rules(&out.rules))?;
            if let Some(l) = log {
                emit(Some(&l), &out.format_log())?;
            }
            eprintln!(
                "{} rules; training errors {} -> {}",
                out.rules.len(),
                out.initial_errors,
                out.final_errors
            );
            Ok(())
        }
        Command::Apply {
            rules,
            learned,
            input,
            output,
        } => {
            let p = pipeline(&rules)?;
            let learned_rules = parse_rules(&read(&learned)?).map_err(|e| data(&learned, e))?;
            let mut pred = Vec::new();
            for (word, origin) in word_list(&input)? {
                let t = predict(&word, &p, &learned_rules).map_err(|e| word_error(&origin, e))?;
                pred.push((word, t));
            }
            emit(output.as_deref(), &format_lexicon(&pred))
        }
        Command::Eval {
            predictions,
            gold,
            per_word,
            macro_avg,
            tsv,
        } => {
            let pred: std::collections::HashMap<String, String> = lexicon(&predictions)?.into_iter().collect();
            let pairs: Vec<(String, String)> = lexicon(&gold)?
                .into_iter()
                .map(|(w, g)| (pred.get(&w).cloned().unwrap_or_default(), g))
                .collect();
            let avg = if macro_avg { Averaging::Macro } else { Averaging::Micro };
            let report = evaluate_with(&pairs, avg, per_word).map_err(|e| data(&gold, e))?;
            emit(None, &if tsv { report.to_tsv() } else { report.to_table() })
        }
        Command::Xval {
            rules,
            lexicon: path,
            folds,
            learn,
            start,
            no_train,
        } => {
            let p = pipeline(&rules)?;
            let lex = lexicon(&path)?;
            let start = match start {
                Start::System => StartLayer::System,
                Start::Frequency => StartLayer::Frequency,
            };
            let method = match (no_train, learn.mode) {
                (true, _) => match start {
                    StartLayer::System => "rules".to_string(),
                    StartLayer::Frequency => "frequency".to_string(),
                },
                (false, TrainMode::Brill) => "brill".to_string(),
                (false, TrainMode::Lazy(k)) => format!("lazy({k})"),
            };
            let cfg = XvalConfig {
                folds,
                seed: learn.seed,
                align: AlignConfig::default(),
                train: (!no_train).then(|| learn.config()),
                templates: learn.templates(),
                start,
                method,
            };
            let cv = cross_validate(&lex, &p, &cfg).map_err(|e| data(&path, e))?;
            emit(None, &cv.to_string())
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("g2pfst: {e}");
            ExitCode::FAILURE
        }
    }
}
