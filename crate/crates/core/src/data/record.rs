use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::labels::{map_evasion_to_clarity, ClarityLabel, EvasionLabel, Task};
use super::DataError;
use crate::features::{extract_boolean_features, BooleanFeatures};

/// Where a record came from; fixes its default loss weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub enum Source {
    #[default]
    Original,
    /// Produced by filling mined rhetorical frames with sampled contexts.
    FrameSynthetic,
    /// Produced by lexical paraphrasing of an original answer.
    ParaphraseSynthetic,
}

impl Source {
    pub const ALL: [Source; 3] = [
        Source::Original,
        Source::FrameSynthetic,
        Source::ParaphraseSynthetic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Original => "original",
            Source::FrameSynthetic => "frame_synthetic",
            Source::ParaphraseSynthetic => "paraphrase_synthetic",
        }
    }

    pub fn is_synthetic(self) -> bool {
        self != Source::Original
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "" | "original" => Ok(Source::Original),
            "frame" | "frame_synthetic" | "framesynthetic" | "casa" | "gemini" | "gemini_synthetic" => {
                Ok(Source::FrameSynthetic)
            }
            "paraphrase" | "paraphrase_synthetic" | "paraphrasesynthetic" | "eda" | "claude"
            | "claude_synthetic" => Ok(Source::ParaphraseSynthetic),
            _ => Err(DataError::UnknownLabel {
                value: s.to_string(),
                kind: "source",
            }),
        }
    }
}

/// Confidence weight applied to a record's loss term, by provenance.
pub fn assign_sample_weights(source: Source) -> f64 {
    match source {
        Source::Original => 1.0,
        Source::FrameSynthetic => 0.7,
        Source::ParaphraseSynthetic => 0.5,
    }
}

/// One question–answer record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAPair {
    pub id: String,
    pub question: String,
    pub answer: String,
    pub clarity: Option<ClarityLabel>,
    pub evasion: Option<EvasionLabel>,
    pub features: BooleanFeatures,
    pub source: Source,
    pub sample_weight: f64,
    pub meta: BTreeMap<String, String>,
}

impl QAPair {
    /// Unlabeled original record with heuristic features.
    pub fn new(
        id: impl Into<String>,
        question: impl Into<String>,
        answer: impl Into<String>,
    ) -> Result<Self, DataError> {
        let question = question.into();
        let answer = answer.into();
        if question.trim().is_empty() {
            return Err(DataError::InvalidRecord {
                row: None,
                reason: "empty question".into(),
            });
        }
        if answer.trim().is_empty() {
            return Err(DataError::InvalidRecord {
                row: None,
                reason: "empty answer".into(),
            });
        }
        let features = extract_boolean_features(&question);
        Ok(Self {
            id: id.into(),
            question,
            answer,
            clarity: None,
            evasion: None,
            features,
            source: Source::Original,
            sample_weight: 1.0,
            meta: BTreeMap::new(),
        })
    }

    pub fn with_clarity(mut self, label: ClarityLabel) -> Result<Self, DataError> {
        self.clarity = Some(label);
        self.check_hierarchy()?;
        Ok(self)
    }

    /// Sets the evasion label and fills the clarity label from the hierarchy
    /// when it is absent.
    pub fn with_evasion(mut self, label: EvasionLabel) -> Result<Self, DataError> {
        self.evasion = Some(label);
        if self.clarity.is_none() {
            self.clarity = Some(map_evasion_to_clarity(label));
        }
        self.check_hierarchy()?;
        Ok(self)
    }

    /// Stamps provenance and the matching default weight.
    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self.sample_weight = assign_sample_weights(source);
        self
    }

    pub fn with_features(mut self, features: BooleanFeatures) -> Self {
        self.features = features;
        self
    }

    pub fn check_hierarchy(&self) -> Result<(), DataError> {
        if let (Some(c), Some(e)) = (self.clarity, self.evasion) {
            if map_evasion_to_clarity(e) != c {
                return Err(DataError::HierarchyViolation {
                    row: None,
                    clarity: c,
                    evasion: e,
                });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.question.trim().is_empty() || self.answer.trim().is_empty() {
            return Err(DataError::InvalidRecord {
                row: None,
                reason: "question and answer must be non-empty".into(),
            });
        }
        if !(self.sample_weight > 0.0 && self.sample_weight <= 1.0) {
            return Err(DataError::InvalidRecord {
                row: None,
                reason: format!("sample weight {} outside (0, 1]", self.sample_weight),
            });
        }
        self.check_hierarchy()
    }

    /// Class code for the given task, if labeled.
    pub fn target(&self, task: Task) -> Option<usize> {
        match task {
            Task::Clarity => self.clarity.map(ClarityLabel::code),
            Task::Evasion => self.evasion.map(EvasionLabel::code),
        }
    }
}

/// Ordered collection of records.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub records: Vec<QAPair>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, records: Vec<QAPair>) -> Self {
        Self {
            name: name.into(),
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, QAPair> {
        self.records.iter()
    }

    /// Sub-dataset by index list, preserving the given order.
    pub fn select(&self, name: impl Into<String>, indices: &[usize]) -> Dataset {
        Dataset::new(
            name,
            indices.iter().map(|&i| self.records[i].clone()).collect(),
        )
    }

    /// Labels for `task`, erroring on the first unlabeled record.
    pub fn targets(&self, task: Task) -> Result<Vec<usize>, DataError> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| r.target(task).ok_or(DataError::Unlabeled { index: i }))
            .collect()
    }

    pub fn clarity_labels(&self) -> Result<Vec<ClarityLabel>, DataError> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| r.clarity.ok_or(DataError::Unlabeled { index: i }))
            .collect()
    }

    /// Concatenate, keeping `self`'s name.
    pub fn extended(mut self, other: &Dataset) -> Dataset {
        self.records.extend(other.records.iter().cloned());
        self
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a QAPair;
    type IntoIter = std::slice::Iter<'a, QAPair>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}
