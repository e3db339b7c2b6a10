use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use g2pfst::align::{build_training_corpus, format_aligned, AlignConfig};
use g2pfst::eval::predict;
use g2pfst::g2p::{parse_rule_file, Pipeline, RuleFile};
use g2pfst::lexicon::format_lexicon;
use g2pfst::synth::planted_lexicon;
use g2pfst::tbl::{format_rules, standard_templates, train, TrainConfig, TrainMode};

fn g2pfst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2pfst")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn transcribe_stages() {
    let out = stdout(&g2pfst(&["transcribe", "--stages", "aanknopingspunt"]));
    assert_eq!(
        out,
        "s: aa-n-k-n-o-p-i-ng-s-p-u-n-t-\nm: #-aa-n-k-n-o-p-i-ng-s-p-u-n-t-#\nco: #-a+N+k-n-o-p-I+N+s-p-}+n-t-#\ncl: aNknopINsp}nt\n"
    );
    assert_eq!(stdout(&g2pfst(&["transcribe", "aalbessen"])), "alb@s@\n");
}

#[test]
fn segment() {
    assert_eq!(stdout(&g2pfst(&["segment", "beiaardier"])), "b-ei-aa-r-d-ie-r-\n");
}

#[test]
fn eval_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("lex.tsv");
    fs::write(&lex, "aalbessen\talbEs@\nwaaien\twaj@\n").unwrap();
    let out = stdout(&g2pfst(&["eval", path(&lex), path(&lex)]));
    assert!(out.contains("word accuracy              100.0"), "{out}");
    assert!(out.contains("phoneme accuracy           100.0"), "{out}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [&["frobnicate"][..], &["train", "--mode", "lazy:x", "c"], &["xval"], &[]] {
        assert_eq!(g2pfst(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn data_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("lex.tsv");
    fs::write(&lex, "# header\nok\tok\nbroken\n").unwrap();
    let o = g2pfst(&["eval", path(&lex), path(&lex)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&format!("{}:3:", lex.display())), "{}", stderr(&o));

    let rules = dir.path().join("x.rules");
    fs::write(&rules, "default a -> a\nrule a -> b / _ @nope\n").unwrap();
    let o = g2pfst(&["transcribe", "--rules", path(&rules), "a"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains(&format!("{}:2:", rules.display())),
        "{}",
        stderr(&o)
    );

    let words = dir.path().join("words.txt");
    fs::write(&words, "aap\nq7x\n").unwrap();
    let o = g2pfst(&["transcribe", "--input", path(&words)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains(&format!("{}:2:", words.display())),
        "{}",
        stderr(&o)
    );

    let o = g2pfst(&["eval", "/nonexistent/p.tsv", path(&lex)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compile_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump.txt");
    let size = stdout(&g2pfst(&["compile", "-o", path(&dump)]));
    let f = Pipeline::new(&RuleFile::dutch()).unwrap().compose();
    assert_eq!(fs::read_to_string(&dump).unwrap(), f.dump());
    assert_eq!(
        size,
        format!("states {} transitions {}\n", f.num_states(), f.num_arcs())
    );
}

#[test]
fn workflow_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let s = planted_lexicon(300, 5, 5, 3);
    let rules = dir.path().join("toy.rules");
    let lex = dir.path().join("lex.tsv");
    fs::write(&rules, &s.rules).unwrap();
    fs::write(&lex, format_lexicon(&s.lexicon)).unwrap();
    let p = Pipeline::new(&parse_rule_file(&s.rules).unwrap()).unwrap();

    let aligned = dir.path().join("aligned.tsv");
    let o = g2pfst(&["align", "--rules", path(&rules), path(&lex), "-o", path(&aligned)]);
    stdout(&o);
    assert!(stderr(&o).contains("aligned 300 of 300 words"), "{}", stderr(&o));
    let (corpus, _, _) = build_training_corpus(&s.lexicon, &p, &AlignConfig::default());
    assert_eq!(fs::read_to_string(&aligned).unwrap(), format_aligned(&corpus));

    let learned = dir.path().join("learned.txt");
    let log = dir.path().join("log.tsv");
    let args = [
        "train",
        path(&aligned),
        "--mode",
        "lazy:3",
        "--seed",
        "7",
        "-o",
        path(&learned),
        "--log",
        path(&log),
    ];
    stdout(&g2pfst(&args));
    let cfg = TrainConfig {
        mode: TrainMode::Lazy(3),
        seed: 7,
        ..Default::default()
    };
    let out = train(&corpus, &standard_templates(), &cfg);
    let text = fs::read_to_string(&learned).unwrap();
    assert_eq!(text, format_rules(&out.rules));
    assert!(fs::read_to_string(&log).unwrap().starts_with("iteration\t"));
    stdout(&g2pfst(&args));
    assert_eq!(fs::read_to_string(&learned).unwrap(), text, "seeded reruns differ");

    let pred = dir.path().join("pred.tsv");
    stdout(&g2pfst(&[
        "apply",
        "--rules",
        path(&rules),
        "--learned",
        path(&learned),
        path(&lex),
        "-o",
        path(&pred),
    ]));
    let expected: Vec<(String, String)> = s
        .lexicon
        .iter()
        .map(|(w, _)| (w.clone(), predict(w, &p, &out.rules).unwrap()))
        .collect();
    assert_eq!(fs::read_to_string(&pred).unwrap(), format_lexicon(&expected));

    let report = stdout(&g2pfst(&["eval", path(&pred), path(&lex), "--tsv", "--per-word"]));
    assert!(report.lines().count() > 300, "{report}");

    let xval = stdout(&g2pfst(&["xval", "--rules", path(&rules), path(&lex), "--folds", "2"]));
    assert!(xval.contains("fold 2:") && xval.contains("brill"), "{xval}");
}
