//! Automated checks on synthetic records.

use std::collections::BTreeSet;
use std::fmt;

use crate::data::{normalize_whitespace, Dataset};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LintIssue {
    TooShort { tokens: usize },
    TooLong { tokens: usize },
    Hierarchy(String),
    /// Same answer text as an earlier synthetic record or an original.
    Duplicate,
}

impl fmt::Display for LintIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LintIssue::TooShort { tokens } => write!(f, "answer too short ({tokens} tokens)"),
            LintIssue::TooLong { tokens } => write!(f, "answer too long ({tokens} tokens)"),
            LintIssue::Hierarchy(m) => write!(f, "label hierarchy: {m}"),
            LintIssue::Duplicate => f.write_str("duplicate answer"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LintBounds {
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for LintBounds {
    fn default() -> Self {
        Self {
            min_tokens: 2,
            max_tokens: 400,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LintReport {
    pub checked: usize,
    pub issues: Vec<(String, LintIssue)>,
}

impl LintReport {
    pub fn flagged_ids(&self) -> BTreeSet<&str> {
        self.issues.iter().map(|(id, _)| id.as_str()).collect()
    }

    /// `synthetic` without flagged records.
    pub fn filter(&self, synthetic: &Dataset) -> Dataset {
        let flagged = self.flagged_ids();
        Dataset::new(
            synthetic.name.clone(),
            synthetic.iter().filter(|r| !flagged.contains(r.id.as_str())).cloned().collect(),
        )
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("id\tissue\n");
        for (id, issue) in &self.issues {
            out.push_str(&format!("{id}\t{issue}\n"));
        }
        out
    }
}

fn answer_key(text: &str) -> String {
    normalize_whitespace(text).to_lowercase()
}

pub fn lint_synthetic(synthetic: &Dataset, originals: &Dataset, bounds: LintBounds) -> LintReport {
    let mut seen: BTreeSet<String> = originals.iter().map(|r| answer_key(&r.answer)).collect();
    let mut issues = Vec::new();
    for r in synthetic.iter() {
        let tokens = r.answer.split_whitespace().count();
        if tokens < bounds.min_tokens {
            issues.push((r.id.clone(), LintIssue::TooShort { tokens }));
        }
        if tokens > bounds.max_tokens {
            issues.push((r.id.clone(), LintIssue::TooLong { tokens }));
        }
        if let Err(e) = r.check_hierarchy() {
            issues.push((r.id.clone(), LintIssue::Hierarchy(e.to_string())));
        }
        if !seen.insert(answer_key(&r.answer)) {
            issues.push((r.id.clone(), LintIssue::Duplicate));
        }
    }
    LintReport {
        checked: synthetic.len(),
        issues,
    }
}
