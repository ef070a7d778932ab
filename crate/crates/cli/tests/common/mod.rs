#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clarity_core::data::{write_dataset, ClarityLabel, Dataset, QAPair};
use clarity_core::model::ModelConfig;

pub const ANSWERS: [(&str, ClarityLabel); 3] = [
    ("Yes, we will absolutely do that.", ClarityLabel::ClearReply),
    ("Well, perhaps, it depends on many factors.", ClarityLabel::Ambivalent),
    ("I will not comment on that.", ClarityLabel::ClearNonReply),
];

const QUESTIONS: [&str; 4] = [
    "Will you raise taxes?",
    "Do you support the bill?",
    "Are you running again?",
    "Will the plant close?",
];

/// Separable corpus: each class has its own answer text.
pub fn toy_corpus(n: usize, prefix: &str) -> Dataset {
    let records = (0..n)
        .map(|i| {
            let (a, l) = ANSWERS[i % 3];
            QAPair::new(format!("{prefix}{i}"), QUESTIONS[(i / 3) % QUESTIONS.len()], a)
                .unwrap()
                .with_clarity(l)
                .unwrap()
        })
        .collect();
    Dataset::new(prefix, records)
}

pub fn toy_model_config(seed: u64) -> ModelConfig {
    ModelConfig {
        vocab_size: 128,
        hidden_width: 8,
        layer_count: 2,
        feature_width: 4,
        dropout: 0.1,
        max_sequence_length: 32,
        init_seed: seed,
        ..ModelConfig::default()
    }
}

/// Config file for a tiny model that fits the toy corpus in a few epochs.
pub const TOY_CONFIG: &str = "\
seed = 7
model.vocab_size = 128
model.hidden_width = 8
model.layer_count = 2
model.feature_width = 4
model.max_sequence_length = 32
model.init_seed = 1
train.base_lr = 0.01
train.micro_batch = 4
train.accumulation_steps = 2
train.max_epochs = 12
train.patience = 2
";

pub fn write_toy(dir: &Path, name: &str, d: &Dataset) -> PathBuf {
    let path = dir.join(name);
    write_dataset(d, &path).unwrap();
    path
}

pub fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("toy.conf");
    fs::write(&path, TOY_CONFIG).unwrap();
    path
}

pub fn clarity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clarity"))
        .args(args)
        .env_remove("GENERATOR_ENDPOINT")
        .env_remove("GENERATOR_API_KEY")
        .output()
        .expect("binary runs")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// prepare → train → predict → evaluate → report under `dir`; returns the
/// exit code and combined output of each step.
pub fn run_chain(dir: &Path) -> Vec<(String, Option<i32>, String)> {
    let labeled = write_toy(dir, "labeled.tsv", &toy_corpus(80, "t"));
    let test = write_toy(dir, "heldout.tsv", &toy_corpus(15, "x"));
    let conf = write_config(dir);
    let data = dir.join("data");
    let run = dir.join("run");
    let pred = dir.join("pred");
    let eval = dir.join("eval");
    let report = dir.join("report");
    let steps: Vec<(&str, Vec<String>)> = vec![
        ("prepare", vec!["prepare", "--train", p(&labeled), "--test", p(&test), "--out", p(&data)].into_iter().map(String::from).collect()),
        (
            "train",
            vec![
                "train".into(),
                "--config".into(),
                p(&conf).into(),
                "--train".into(),
                p(&data.join("train.tsv")).into(),
                "--dev".into(),
                p(&data.join("dev.tsv")).into(),
                "--out".into(),
                p(&run).into(),
            ],
        ),
        (
            "predict",
            vec![
                "predict".into(),
                "--model-id".into(),
                p(&run.join("checkpoint")).into(),
                "--test".into(),
                p(&data.join("test.tsv")).into(),
                "--out".into(),
                p(&pred).into(),
            ],
        ),
        (
            "evaluate",
            vec![
                "evaluate".into(),
                "--test".into(),
                p(&data.join("test.tsv")).into(),
                "--pred".into(),
                p(&pred.join("predictions.tsv")).into(),
                "--out".into(),
                p(&eval).into(),
            ],
        ),
        (
            "report",
            vec![
                "report".into(),
                "--matrix".into(),
                p(&eval.join("matrix.tsv")).into(),
                "--out".into(),
                p(&report).into(),
            ],
        ),
    ];
    let mut out = Vec::new();
    for (name, args) in steps {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = clarity(&args);
        let code = o.status.code();
        out.push((name.to_string(), code, format!("{}{}", stdout(&o), stderr(&o))));
        if code != Some(0) {
            break;
        }
    }
    out
}
