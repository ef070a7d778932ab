//! The two boolean discourse features attached to every question.
//!
//! Values supplied by the dataset always win; [`extract_boolean_features`] is
//! the fallback used when a file has no feature columns.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::data::{DataError, Dataset};

const AUXILIARIES: &str = include_str!("../../resources/auxiliaries.txt");

/// Question words that open an interrogative clause without a `?`.
const WH_WORDS: &[&str] = &["what", "why", "how", "when", "where", "who", "whom", "whose", "which"];

/// Tokens ending in `.` that do not end a sentence.
const ABBREVIATIONS: &[&str] = &["mr.", "mrs.", "ms.", "dr.", "st.", "u.s.", "u.k.", "jr.", "sr.", "gen.", "sen.", "rep.", "gov."];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum FeatureProvenance {
    DatasetColumn,
    #[default]
    Heuristic,
}

impl fmt::Display for FeatureProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureProvenance::DatasetColumn => "dataset",
            FeatureProvenance::Heuristic => "heuristic",
        })
    }
}

impl FromStr for FeatureProvenance {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dataset" | "dataset_column" | "column" => Ok(FeatureProvenance::DatasetColumn),
            "heuristic" => Ok(FeatureProvenance::Heuristic),
            _ => Err(DataError::UnknownLabel {
                value: s.to_string(),
                kind: "feature provenance",
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct BooleanFeatures {
    pub affirmative_question: bool,
    pub multiple_questions: bool,
    pub provenance: FeatureProvenance,
}

impl BooleanFeatures {
    pub fn from_dataset(affirmative_question: bool, multiple_questions: bool) -> Self {
        Self {
            affirmative_question,
            multiple_questions,
            provenance: FeatureProvenance::DatasetColumn,
        }
    }

    /// Model input vector `[affirmative, multiple]` in {0, 1}.
    pub fn as_vector(&self) -> [f64; 2] {
        [
            f64::from(u8::from(self.affirmative_question)),
            f64::from(u8::from(self.multiple_questions)),
        ]
    }
}

fn auxiliaries() -> &'static Vec<String> {
    static WORDS: OnceLock<Vec<String>> = OnceLock::new();
    WORDS.get_or_init(|| {
        AUXILIARIES
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect()
    })
}

/// Split into sentences at `?`, `!` and sentence-final `.`, keeping the
/// terminator with its sentence.
fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for tok in text.split_whitespace() {
        current.push(tok);
        let lower = tok.to_lowercase();
        let ends = tok.ends_with('?')
            || tok.ends_with('!')
            || (tok.ends_with('.') && !ABBREVIATIONS.contains(&lower.as_str()));
        if ends {
            out.push(current.join(" "));
            current.clear();
        }
    }
    if !current.is_empty() {
        out.push(current.join(" "));
    }
    out
}

fn first_word(sentence: &str) -> String {
    sentence
        .split_whitespace()
        .next()
        .unwrap_or("")
        .trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
        .to_lowercase()
}

fn starts_with_auxiliary(sentence: &str) -> bool {
    let w = first_word(sentence);
    auxiliaries().iter().any(|a| *a == w)
}

fn is_interrogative(sentence: &str) -> bool {
    sentence.trim_end().ends_with('?')
        || starts_with_auxiliary(sentence)
        || WH_WORDS.contains(&first_word(sentence).as_str())
}

/// Heuristic features for a question.
///
/// `affirmative_question`: the first interrogative clause (or the first
/// sentence, when none is interrogative) opens with an auxiliary or modal from
/// the bundled word list. `multiple_questions`: at least two `?` characters or
/// at least two interrogative clauses.
pub fn extract_boolean_features(question: &str) -> BooleanFeatures {
    let sents = sentences(question);
    let interrogative: Vec<&String> = sents.iter().filter(|s| is_interrogative(s)).collect();
    let lead = interrogative
        .first()
        .map(|s| s.as_str())
        .or_else(|| sents.first().map(String::as_str))
        .unwrap_or("");
    let marks = question.matches('?').count();
    BooleanFeatures {
        affirmative_question: starts_with_auxiliary(lead),
        multiple_questions: marks >= 2 || interrogative.len() >= 2,
        provenance: FeatureProvenance::Heuristic,
    }
}

/// Agreement between dataset-supplied feature columns and the heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureAgreement {
    pub compared: usize,
    pub affirmative_agreement: f64,
    pub multiple_agreement: f64,
}

/// Compare the heuristic against records whose features came from the
/// dataset. `None` when no record has dataset-supplied features.
pub fn feature_agreement(d: &Dataset) -> Option<FeatureAgreement> {
    let mut n = 0usize;
    let (mut aff, mut multi) = (0usize, 0usize);
    for r in d.iter().filter(|r| r.features.provenance == FeatureProvenance::DatasetColumn) {
        let h = extract_boolean_features(&r.question);
        n += 1;
        aff += usize::from(h.affirmative_question == r.features.affirmative_question);
        multi += usize::from(h.multiple_questions == r.features.multiple_questions);
    }
    (n > 0).then(|| FeatureAgreement {
        compared: n,
        affirmative_agreement: aff as f64 / n as f64,
        multiple_agreement: multi as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::QAPair;

    fn bits(q: &str) -> (bool, bool) {
        let f = extract_boolean_features(q);
        (f.affirmative_question, f.multiple_questions)
    }

    #[test]
    fn reference_question() {
        assert_eq!(bits("Will you increase funding for education?"), (true, false));
    }

    #[test]
    fn wh_question_is_not_affirmative() {
        assert_eq!(bits("Why?"), (false, false));
    }

    #[test]
    fn two_question_marks() {
        assert_eq!(bits("Did you know? And will you act?"), (true, true));
    }

    #[test]
    fn case_insensitive_and_skips_preamble() {
        assert_eq!(bits("WOULD you consider it?"), (true, false));
        assert_eq!(
            bits("Mr. President, thank you. Does an apology rule out the question of honor?"),
            (true, false)
        );
        assert_eq!(bits("So he said those things under oath?"), (false, false));
    }

    #[test]
    fn interrogative_clauses_without_marks() {
        assert_eq!(bits("What happened. Why did it happen."), (false, true));
    }

    #[test]
    fn agreement_counts_dataset_columns_only() {
        let mut a = QAPair::new("a", "Will you act?", "Yes.").unwrap();
        a.features = BooleanFeatures::from_dataset(true, true);
        let b = QAPair::new("b", "Why?", "No.").unwrap();
        let d = Dataset::new("x", vec![a, b]);
        let ag = feature_agreement(&d).unwrap();
        assert_eq!(ag.compared, 1);
        assert_eq!(ag.affirmative_agreement, 1.0);
        assert_eq!(ag.multiple_agreement, 0.0);
        assert!(feature_agreement(&Dataset::default()).is_none());
    }
}
