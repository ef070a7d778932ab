mod common;

use std::fs;
use std::path::Path;

use clarity_core::data::{write_dataset, write_task_predictions, ClarityLabel, Dataset, QAPair, Task};
use serde_json::Value;

use common::*;

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn no_arguments_is_a_usage_error() {
    let o = clarity(&[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(clarity(&["--help"]).status.code(), Some(0));
}

#[test]
fn train_has_no_test_flag() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_toy(dir.path(), "t.tsv", &toy_corpus(12, "t"));
    let o = clarity(&["train", "--train", p(&t), "--dev", p(&t), "--test", p(&t), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn train_refuses_held_out_records() {
    let dir = tempfile::tempdir().unwrap();
    let mut d = toy_corpus(12, "t");
    d.records[0].meta.insert("split".into(), "test".into());
    let t = write_toy(dir.path(), "t.tsv", &d);
    let dev = write_toy(dir.path(), "d.tsv", &toy_corpus(6, "d"));
    let o = clarity(&["train", "--train", p(&t), "--dev", p(&dev), "--out", p(&dir.path().join("run"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("held-out"));
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = clarity(&["prepare", "--train", p(&dir.path().join("nope.tsv")), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

/// Gold records and predictions realizing the published test matrix.
fn table3_files(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let rows = [
        (ClarityLabel::Ambivalent, [136, 58, 12]),
        (ClarityLabel::ClearReply, [23, 53, 3]),
        (ClarityLabel::ClearNonReply, [6, 0, 17]),
    ];
    let cols = [ClarityLabel::Ambivalent, ClarityLabel::ClearReply, ClarityLabel::ClearNonReply];
    let mut gold = Vec::new();
    let mut preds = Vec::new();
    for (truth, counts) in rows {
        for (col, n) in cols.iter().zip(counts) {
            for _ in 0..n {
                let id = format!("r{}", gold.len());
                gold.push(QAPair::new(id.clone(), "Q?", "A.").unwrap().with_clarity(truth).unwrap());
                preds.push((id, col.code()));
            }
        }
    }
    let g = dir.join("gold.tsv");
    write_dataset(&Dataset::new("gold", gold), &g).unwrap();
    let pr = dir.join("pred.tsv");
    write_task_predictions(&preds, Task::Clarity, &pr).unwrap();
    (g, pr)
}

#[test]
fn evaluate_reproduces_published_macro_f1() {
    let dir = tempfile::tempdir().unwrap();
    let (gold, pred) = table3_files(dir.path());
    let out = dir.path().join("eval");
    let o = clarity(&["evaluate", "--test", p(&gold), "--pred", p(&pred), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("Macro F1: 0.6364"), "{}", stdout(&o));
    assert!((manifest(&out)["summary"]["macro_f1"].as_f64().unwrap() - 0.6364).abs() < 5e-5);
    let errors = fs::read_to_string(out.join("errors.tsv")).unwrap();
    assert_eq!(errors.lines().count(), 1 + 102);

    let report = dir.path().join("report");
    let o = clarity(&[
        "report",
        "--matrix",
        p(&out.join("matrix.tsv")),
        "--order",
        "Ambivalent,Clear Reply,Clear Non-Reply",
        "--out",
        p(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("Macro F1: 0.6364"));
    let amb = text.find("206 (66.9%)").unwrap();
    let clear = text.find("79 (25.6%)").unwrap();
    assert!(amb < clear, "rows not in requested order");
}

#[test]
fn evaluate_rejects_missing_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let (gold, _) = table3_files(dir.path());
    let pr = dir.path().join("few.tsv");
    write_task_predictions(&[("r0".to_string(), 0)], Task::Clarity, &pr).unwrap();
    let o = clarity(&["evaluate", "--test", p(&gold), "--pred", p(&pr)]);
    assert_eq!(o.status.code(), Some(2));
}

fn reference_training_file(dir: &Path) -> std::path::PathBuf {
    let texts = [
        (ClarityLabel::ClearReply, "Yes, we will pass the bill on taxes this year."),
        (ClarityLabel::Ambivalent, "Well, it depends on the committee and the budget."),
        (ClarityLabel::ClearNonReply, "I cannot comment on the investigation right now."),
    ];
    let mut records = Vec::new();
    for (label, n) in [(ClarityLabel::ClearReply, 1052), (ClarityLabel::Ambivalent, 2040), (ClarityLabel::ClearNonReply, 356)] {
        let text = texts.iter().find(|(l, _)| *l == label).unwrap().1;
        for i in 0..n {
            records.push(
                QAPair::new(format!("{}-{i}", label.code()), "What about it?", format!("{text} Point {}.", i % 17))
                    .unwrap()
                    .with_clarity(label)
                    .unwrap(),
            );
        }
    }
    let path = dir.join("reference.tsv");
    write_dataset(&Dataset::new("reference", records), &path).unwrap();
    path
}

#[test]
fn augment_full_balance_reports_generated_count() {
    let dir = tempfile::tempdir().unwrap();
    let train = reference_training_file(dir.path());
    let out = dir.path().join("aug");
    let o = clarity(&["augment", "--train", p(&train), "--out", p(&out), "--mode", "full-balance", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["summary"]["generated"], 2672);
    assert_eq!(m["summary"]["augmented_total"], 6120);
    assert_eq!(m["summary"]["generated_per_class"]["Clear Reply"], 988);
    assert_eq!(m["summary"]["generated_per_class"]["Clear Non-Reply"], 1684);
    assert_eq!(m["seed"], 3);
    assert_eq!(m["config_sources"]["seed"], "flag");
}

#[test]
fn augment_partial_recipe() {
    let dir = tempfile::tempdir().unwrap();
    let train = reference_training_file(dir.path());
    let out = dir.path().join("aug");
    let o = clarity(&["augment", "--train", p(&train), "--out", p(&out), "--mode", "partial", "--source", "paraphrase"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["summary"]["generated"], 1086);
    assert_eq!(m["summary"]["augmented_total"], 4534);
}

fn strip_times(v: &mut Value) {
    let obj = v.as_object_mut().unwrap();
    obj.remove("started_unix");
    obj.remove("finished_unix");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let input = toy_corpus(30, "t");
    let files = |dir: &Path| {
        let mut d = input.clone();
        d.records.truncate(26);
        let t = write_toy(dir, "in.tsv", &d);
        let out = dir.join("out");
        let o = clarity(&["augment", "--train", p(&t), "--out", p(&out), "--seed", "9"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        out
    };
    let (oa, ob) = (files(a.path()), files(b.path()));
    for f in ["synthetic.tsv", "augmented_train.tsv", "lint.tsv", "distribution.tsv"] {
        assert_eq!(fs::read(oa.join(f)).unwrap(), fs::read(ob.join(f)).unwrap(), "{f}");
    }
    let (mut ma, mut mb) = (manifest(&oa), manifest(&ob));
    strip_times(&mut ma);
    strip_times(&mut mb);
    // Input paths differ between the two temp dirs; digests must not.
    let digests = |m: &Value| m["inputs"].as_array().unwrap().iter().map(|i| i["sha256"].clone()).collect::<Vec<_>>();
    assert_eq!(digests(&ma), digests(&mb));
    assert_eq!(ma["summary"], mb["summary"]);
    assert_eq!(ma["config"], mb["config"]);
}

#[test]
fn full_chain_runs_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let steps = run_chain(a.path());
    for (name, code, text) in &steps {
        assert_eq!(*code, Some(0), "{name}: {text}");
    }
    assert_eq!(steps.len(), 5);
    let train = manifest(&a.path().join("run"));
    assert_eq!(train["summary"]["best_dev_macro_f1"], 1.0);
    assert_eq!(train["config"]["train.base_lr"], "0.01");
    assert_eq!(train["config_sources"]["train.base_lr"], "file");
    assert!(a.path().join("run/checkpoint").is_dir());
    let prepared = fs::read_to_string(a.path().join("data/test.tsv")).unwrap();
    assert!(prepared.lines().skip(1).all(|l| l.contains("\ttest")));

    let b = tempfile::tempdir().unwrap();
    run_chain(b.path());
    for f in ["data/train.tsv", "data/dev.tsv", "run/history.tsv", "pred/predictions.tsv", "eval/matrix.tsv", "report/report.md"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn baselines_write_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let train = write_toy(dir.path(), "train.tsv", &toy_corpus(60, "t"));
    let test = write_toy(dir.path(), "test.tsv", &toy_corpus(15, "x"));
    let conf = dir.path().join("b.conf");
    fs::write(&conf, "baseline.tfidf.min_df = 1\nbaseline.svm.folds = 3\nbaseline.forest.n_trees = 10\n").unwrap();
    let out = dir.path().join("base");
    let o = clarity(&[
        "baseline",
        "--config",
        p(&conf),
        "--kind",
        "majority,tfidf-logreg,tfidf-svm,tfidf-random-forest",
        "--train",
        p(&train),
        "--test",
        p(&test),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cmp = fs::read_to_string(out.join("comparison.md")).unwrap();
    assert!(cmp.contains("0.4476"), "{cmp}");
    assert!(fs::read_to_string(out.join("tfidf-logreg/summary.txt")).unwrap().contains("macro_f1=1"));
    let o = clarity(&["report", "--baselines", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("TF-IDF + SVM"));
    let o = clarity(&["baseline", "--kind", "nonsense", "--train", p(&train), "--test", p(&test), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flag_seed_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let labeled = write_toy(dir.path(), "l.tsv", &toy_corpus(30, "t"));
    let conf = dir.path().join("c.conf");
    fs::write(&conf, "seed = 5\n").unwrap();
    let out = dir.path().join("o");
    let o = clarity(&["prepare", "--config", p(&conf), "--seed", "11", "--train", p(&labeled), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["seed"], 11);
    assert_eq!(m["config_sources"]["seed"], "flag");
    let o = clarity(&["prepare", "--config", p(&conf), "--train", p(&labeled), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(manifest(&out)["seed"], 5);
}
