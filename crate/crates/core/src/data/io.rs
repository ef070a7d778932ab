//! Delimiter-separated dataset files and `id<TAB>label` prediction files.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use super::{ClarityLabel, DataError, Dataset, EvasionLabel, QAPair, Source, Task};
use crate::config::KvConfig;
use crate::features::{BooleanFeatures, FeatureProvenance};

/// Column names for each record field. Optional columns that are missing from
/// a file's header are treated as absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub delimiter: u8,
    pub id: Option<String>,
    pub question: String,
    pub answer: String,
    pub clarity: Option<String>,
    pub evasion: Option<String>,
    pub affirmative_question: Option<String>,
    pub multiple_questions: Option<String>,
    pub source: Option<String>,
    pub sample_weight: Option<String>,
    pub feature_provenance: Option<String>,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            delimiter: b'\t',
            id: Some("id".into()),
            question: "question".into(),
            answer: "answer".into(),
            clarity: Some("clarity".into()),
            evasion: Some("evasion".into()),
            affirmative_question: Some("affirmative_questions".into()),
            multiple_questions: Some("multiple_questions".into()),
            source: Some("source".into()),
            sample_weight: Some("sample_weight".into()),
            feature_provenance: Some("feature_provenance".into()),
        }
    }
}

impl Schema {
    /// Overrides from a `schema.*` config section. An empty value disables an
    /// optional column.
    pub fn from_config(cfg: &KvConfig) -> Result<Self, DataError> {
        let mut s = Schema::default();
        let opt = |key: &str, slot: &mut Option<String>| {
            if let Some(v) = cfg.get(key) {
                *slot = if v.is_empty() { None } else { Some(v.to_string()) };
            }
        };
        opt("id", &mut s.id);
        opt("clarity", &mut s.clarity);
        opt("evasion", &mut s.evasion);
        opt("affirmative_questions", &mut s.affirmative_question);
        opt("multiple_questions", &mut s.multiple_questions);
        opt("source", &mut s.source);
        opt("sample_weight", &mut s.sample_weight);
        opt("feature_provenance", &mut s.feature_provenance);
        if let Some(q) = cfg.get("question") {
            s.question = q.to_string();
        }
        if let Some(a) = cfg.get("answer") {
            s.answer = a.to_string();
        }
        if let Some(d) = cfg.get("delimiter") {
            s.delimiter = match d {
                "tab" | "\\t" => b'\t',
                "comma" | "," => b',',
                other if other.len() == 1 => other.as_bytes()[0],
                other => {
                    return Err(DataError::InvalidArgument(format!(
                        "unsupported delimiter {other:?}"
                    )))
                }
            };
        }
        Ok(s)
    }

    fn named(&self) -> Vec<&str> {
        let mut v = vec![self.question.as_str(), self.answer.as_str()];
        for c in [
            &self.id,
            &self.clarity,
            &self.evasion,
            &self.affirmative_question,
            &self.multiple_questions,
            &self.source,
            &self.sample_weight,
            &self.feature_provenance,
        ]
        .into_iter()
        .flatten()
        {
            v.push(c.as_str());
        }
        v
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" | "t" => Some(true),
        "0" | "false" | "no" | "n" | "f" => Some(false),
        _ => None,
    }
}

/// Load a dataset. Rows keep file order; unknown label strings and
/// hierarchy violations are rejected with the offending line number.
pub fn load_dataset(path: &Path, schema: &Schema) -> Result<Dataset, DataError> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = File::open(path).map_err(io_err(path))?;
    if file.metadata().map_err(io_err(path))?.len() == 0 {
        warn!("{}: empty file, no records loaded", path.display());
        return Ok(Dataset::new(name, Vec::new()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(true)
        .flexible(false)
        .quoting(schema.delimiter != b'\t')
        .from_reader(BufReader::new(file));

    let headers = reader
        .headers()
        .map_err(|e| DataError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let opt_col = |name: &Option<String>| name.as_deref().and_then(col);

    let q_col = col(&schema.question).ok_or_else(|| DataError::MissingColumn(schema.question.clone()))?;
    let a_col = col(&schema.answer).ok_or_else(|| DataError::MissingColumn(schema.answer.clone()))?;
    let id_col = opt_col(&schema.id);
    let clarity_col = opt_col(&schema.clarity);
    let evasion_col = opt_col(&schema.evasion);
    let aff_col = opt_col(&schema.affirmative_question);
    let multi_col = opt_col(&schema.multiple_questions);
    let source_col = opt_col(&schema.source);
    let weight_col = opt_col(&schema.sample_weight);
    let prov_col = opt_col(&schema.feature_provenance);
    let named: BTreeSet<&str> = schema.named().into_iter().collect();
    let meta_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !named.contains(h.trim()))
        .map(|(i, h)| (i, h.trim().to_string()))
        .collect();

    if aff_col.is_none() || multi_col.is_none() {
        warn!(
            "{}: boolean feature column(s) missing, using heuristic extraction",
            path.display()
        );
    }

    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let row = row.map_err(|e| DataError::Malformed {
            line: e.position().map(|p| p.line()).unwrap_or(line),
            message: e.to_string(),
        })?;
        let cell = |c: Option<usize>| c.and_then(|c| row.get(c)).map(str::trim).filter(|s| !s.is_empty());
        let at_line = |e: DataError| match e {
            DataError::HierarchyViolation { clarity, evasion, .. } => DataError::HierarchyViolation {
                row: Some(line),
                clarity,
                evasion,
            },
            DataError::InvalidRecord { reason, .. } => DataError::InvalidRecord {
                row: Some(line),
                reason,
            },
            other => other,
        };

        let id = cell(id_col)
            .map(str::to_string)
            .unwrap_or_else(|| idx.to_string());
        let question = row.get(q_col).unwrap_or("");
        let answer = row.get(a_col).unwrap_or("");
        let mut pair = QAPair::new(id, question, answer).map_err(at_line)?;

        if let Some(s) = cell(source_col) {
            pair = pair.with_source(s.parse::<Source>()?);
        }
        if let Some(w) = cell(weight_col) {
            pair.sample_weight = w.parse::<f64>().map_err(|e| DataError::InvalidRecord {
                row: Some(line),
                reason: format!("sample weight {w:?}: {e}"),
            })?;
        }
        if let Some(c) = cell(clarity_col) {
            pair.clarity = Some(c.parse::<ClarityLabel>()?);
        }
        if let Some(e) = cell(evasion_col) {
            pair = pair.with_evasion(e.parse::<EvasionLabel>()?).map_err(at_line)?;
        }

        let parsed_bit = |c: Option<usize>, name: &str| -> Result<Option<bool>, DataError> {
            match cell(c) {
                None => Ok(None),
                Some(v) => parse_bool(v).map(Some).ok_or_else(|| DataError::InvalidRecord {
                    row: Some(line),
                    reason: format!("{name}: not a boolean: {v:?}"),
                }),
            }
        };
        let aff = parsed_bit(aff_col, "affirmative_questions")?;
        let multi = parsed_bit(multi_col, "multiple_questions")?;
        let heuristic = pair.features;
        pair.features = match (aff, multi) {
            (Some(a), Some(m)) => {
                let provenance = match cell(prov_col) {
                    Some(p) => p.parse::<FeatureProvenance>()?,
                    None => FeatureProvenance::DatasetColumn,
                };
                BooleanFeatures {
                    affirmative_question: a,
                    multiple_questions: m,
                    provenance,
                }
            }
            (None, None) => heuristic,
            (a, m) => BooleanFeatures {
                affirmative_question: a.unwrap_or(heuristic.affirmative_question),
                multiple_questions: m.unwrap_or(heuristic.multiple_questions),
                provenance: FeatureProvenance::Heuristic,
            },
        };

        for (c, name) in &meta_cols {
            if let Some(v) = row.get(*c).filter(|v| !v.is_empty()) {
                pair.meta.insert(name.clone(), v.to_string());
            }
        }
        pair.validate().map_err(at_line)?;
        records.push(pair);
    }
    if records.is_empty() {
        warn!("{}: no records", path.display());
    }
    Ok(Dataset::new(name, records))
}

fn check_cell(s: &str, what: &str) -> Result<(), DataError> {
    if s.contains(['\t', '\n', '\r']) {
        return Err(DataError::InvalidRecord {
            row: None,
            reason: format!("{what} contains a tab or newline: {s:?}"),
        });
    }
    Ok(())
}

/// Write in the canonical tab-separated layout (see [`Schema::default`]),
/// followed by any metadata columns in sorted order.
pub fn write_dataset(d: &Dataset, path: &Path) -> Result<(), DataError> {
    let meta_keys: BTreeSet<&str> = d
        .records
        .iter()
        .flat_map(|r| r.meta.keys().map(String::as_str))
        .collect();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut header = vec![
        "id",
        "question",
        "answer",
        "clarity",
        "evasion",
        "affirmative_questions",
        "multiple_questions",
        "feature_provenance",
        "source",
        "sample_weight",
    ];
    header.extend(meta_keys.iter().copied());
    writeln!(w, "{}", header.join("\t")).map_err(io_err(path))?;
    for r in &d.records {
        let question = super::normalize_whitespace(&r.question);
        let answer = super::normalize_whitespace(&r.answer);
        check_cell(&r.id, "id")?;
        let mut cells: Vec<String> = vec![
            r.id.clone(),
            question,
            answer,
            r.clarity.map(|l| l.name().to_string()).unwrap_or_default(),
            r.evasion.map(|l| l.name().to_string()).unwrap_or_default(),
            u8::from(r.features.affirmative_question).to_string(),
            u8::from(r.features.multiple_questions).to_string(),
            r.features.provenance.to_string(),
            r.source.to_string(),
            format!("{}", r.sample_weight),
        ];
        for k in &meta_keys {
            let v = r.meta.get(*k).cloned().unwrap_or_default();
            check_cell(&v, k)?;
            cells.push(v);
        }
        writeln!(w, "{}", cells.join("\t")).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// `id<TAB>label-name` lines for class codes under `task`.
pub fn write_task_predictions(
    rows: &[(String, usize)],
    task: Task,
    path: &Path,
) -> Result<(), DataError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for (id, code) in rows {
        check_cell(id, "id")?;
        let name = task.label_name(*code).ok_or_else(|| {
            DataError::InvalidArgument(format!("class code {code} out of range for {task}"))
        })?;
        writeln!(w, "{id}\t{name}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_task_predictions(path: &Path, task: Task) -> Result<Vec<(String, usize)>, DataError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let Some((id, label)) = line.split_once('\t') else {
            return Err(DataError::Malformed {
                line: i as u64 + 1,
                message: "expected `id<TAB>label`".into(),
            });
        };
        out.push((id.to_string(), task.parse_label(label)?));
    }
    Ok(out)
}

/// One `id<TAB>label` line per pair.
pub fn write_predictions(pairs: &[(QAPair, ClarityLabel)], path: &Path) -> Result<(), DataError> {
    let rows: Vec<(String, usize)> = pairs.iter().map(|(p, l)| (p.id.clone(), l.code())).collect();
    write_task_predictions(&rows, Task::Clarity, path)
}

pub fn read_predictions(path: &Path) -> Result<Vec<(String, ClarityLabel)>, DataError> {
    Ok(read_task_predictions(path, Task::Clarity)?
        .into_iter()
        .map(|(id, c)| (id, ClarityLabel::from_code(c).expect("parsed clarity code")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_file(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        p
    }

    #[test]
    fn loads_labeled_rows_with_features_and_meta() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(
            &dir,
            "train.tsv",
            "id\tquestion\tanswer\tclarity\tevasion\taffirmative_questions\tmultiple_questions\tdate\n\
             a\tWill you act?\tYes.\tClear Reply\tExplicit\t1\t0\t2017-06\n\
             b\tWhy?\tWhose role?\t\tClarification\tfalse\ttrue\t1992-08\n",
        );
        let d = load_dataset(&p, &Schema::default()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.records[0].clarity, Some(ClarityLabel::ClearReply));
        assert_eq!(d.records[1].clarity, Some(ClarityLabel::ClearNonReply));
        assert_eq!(d.records[1].evasion, Some(EvasionLabel::Clarification));
        assert!(d.records[1].features.multiple_questions);
        assert_eq!(d.records[0].features.provenance, FeatureProvenance::DatasetColumn);
        assert_eq!(d.records[0].meta.get("date").map(String::as_str), Some("2017-06"));
    }

    #[test]
    fn hierarchy_violation_is_rejected_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(
            &dir,
            "bad.tsv",
            "question\tanswer\tclarity\tevasion\nQ?\tA.\tAmbivalent\tExplicit\n",
        );
        let err = load_dataset(&p, &Schema::default()).unwrap_err();
        assert!(matches!(err, DataError::HierarchyViolation { row: Some(2), .. }), "{err}");
    }

    #[test]
    fn unknown_label_names_value() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "bad.tsv", "question\tanswer\tclarity\nQ?\tA.\tSomewhat\n");
        let err = load_dataset(&p, &Schema::default()).unwrap_err();
        assert!(err.to_string().contains("Somewhat"));
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "bad.tsv", "question\tanswer\nQ?\tA.\nonly-one-field\n");
        let err = load_dataset(&p, &Schema::default()).unwrap_err();
        match err {
            DataError::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file_gives_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "empty.tsv", "");
        assert!(load_dataset(&p, &Schema::default()).unwrap().is_empty());
    }

    #[test]
    fn missing_feature_columns_fall_back_to_heuristic() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(
            &dir,
            "nofeat.tsv",
            "question\tanswer\nWill you increase funding for education?\tNo.\n",
        );
        let d = load_dataset(&p, &Schema::default()).unwrap();
        let f = d.records[0].features;
        assert_eq!(f.provenance, FeatureProvenance::Heuristic);
        assert!(f.affirmative_question);
        assert!(!f.multiple_questions);
    }

    #[test]
    fn custom_schema_and_comma_delimiter() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(
            &dir,
            "qe.csv",
            "interview_question,interview_answer,clarity_label\n\"Why, then?\",\"Because.\",Ambivalent\n",
        );
        let cfg = KvConfig::parse(
            "question = interview_question\nanswer = interview_answer\nclarity = clarity_label\ndelimiter = comma\n",
        )
        .unwrap();
        let d = load_dataset(&p, &Schema::from_config(&cfg).unwrap()).unwrap();
        assert_eq!(d.records[0].question, "Why, then?");
        assert_eq!(d.records[0].id, "0");
    }

    #[test]
    fn dataset_round_trips_through_canonical_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = QAPair::new("a", "Will you act?", "Yes we will.")
            .unwrap()
            .with_evasion(EvasionLabel::Explicit)
            .unwrap();
        a.meta.insert("split".into(), "train".into());
        let b = QAPair::new("b", "Why?", "No comment.")
            .unwrap()
            .with_clarity(ClarityLabel::ClearNonReply)
            .unwrap()
            .with_source(Source::FrameSynthetic);
        let d = Dataset::new("rt", vec![a, b]);
        let p = dir.path().join("rt.tsv");
        write_dataset(&d, &p).unwrap();
        let back = load_dataset(&p, &Schema::default()).unwrap();
        assert_eq!(back.records, d.records);
    }

    #[test]
    fn predictions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pred.tsv");
        let pairs: Vec<(QAPair, ClarityLabel)> = ClarityLabel::ALL
            .iter()
            .enumerate()
            .map(|(i, &l)| (QAPair::new(format!("r{i}"), "Q?", "A.").unwrap(), l))
            .collect();
        write_predictions(&pairs, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().next(), Some("r0\tClear Reply"));
        let back = read_predictions(&p).unwrap();
        let expected: Vec<(String, ClarityLabel)> =
            pairs.iter().map(|(q, l)| (q.id.clone(), *l)).collect();
        assert_eq!(back, expected);

        write_predictions(&[], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "");
    }

    #[test]
    fn unwritable_prediction_path_errors() {
        let r = write_predictions(&[], Path::new("/nonexistent-dir/x/pred.tsv"));
        assert!(matches!(r, Err(DataError::Io { .. })));
    }
}
