//! Word lists and templates used by augmentation. Bundled copies are
//! compiled in; every list can be replaced from a file.

use std::collections::BTreeMap;
use std::path::Path;

use super::AugmentError;

const THESAURUS: &str = include_str!("../../resources/thesaurus.tsv");
const SLOT_ANCHORS: &str = include_str!("../../resources/slot_anchors.txt");
const CONTEXTS: &str = include_str!("../../resources/contexts.txt");
const QUESTION_TEMPLATES: &str = include_str!("../../resources/question_templates.txt");
const ENTITIES: &str = include_str!("../../resources/entities.txt");

/// Non-empty lines that are not `#` comments, trimmed.
pub fn list_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub(crate) fn read_text(path: &Path) -> Result<String, AugmentError> {
    std::fs::read_to_string(path).map_err(|source| AugmentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Lowercase word → single-token synonyms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Thesaurus {
    entries: BTreeMap<String, Vec<String>>,
}

impl Thesaurus {
    /// `word<TAB>syn1,syn2,...` per line. Multi-word synonyms are dropped so
    /// replacement and insertion keep token counts predictable.
    pub fn parse(text: &str) -> Result<Self, AugmentError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, syns) = line.split_once('\t').ok_or_else(|| AugmentError::Resource(format!("thesaurus line {}: expected word<TAB>synonyms", i + 1)))?;
            let syns: Vec<String> = syns
                .split(',')
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty() && !s.contains(char::is_whitespace))
                .collect();
            if !syns.is_empty() {
                entries.insert(word.trim().to_lowercase(), syns);
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, AugmentError> {
        Self::parse(&read_text(path)?)
    }

    pub fn bundled() -> Self {
        Self::parse(THESAURUS).expect("bundled thesaurus parses")
    }

    pub fn synonyms(&self, word: &str) -> &[String] {
        self.entries.get(&word.to_lowercase()).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentResources {
    pub thesaurus: Thesaurus,
    /// Words after which the rest of a clause counts as a topic span.
    pub slot_anchors: Vec<String>,
    pub contexts: Vec<String>,
    /// Interrogative templates containing `{CONTEXT}`.
    pub question_templates: Vec<String>,
    pub entities: Vec<String>,
}

impl AugmentResources {
    pub fn bundled() -> Self {
        Self {
            thesaurus: Thesaurus::bundled(),
            slot_anchors: list_lines(SLOT_ANCHORS).into_iter().map(|w| w.to_lowercase()).collect(),
            contexts: list_lines(CONTEXTS),
            question_templates: list_lines(QUESTION_TEMPLATES),
            entities: list_lines(ENTITIES),
        }
    }

    pub fn with_contexts_file(mut self, path: &Path) -> Result<Self, AugmentError> {
        let contexts = list_lines(&read_text(path)?);
        if contexts.is_empty() {
            return Err(AugmentError::Resource(format!("{}: no contexts", path.display())));
        }
        self.contexts = contexts;
        Ok(self)
    }

    pub fn with_thesaurus_file(mut self, path: &Path) -> Result<Self, AugmentError> {
        self.thesaurus = Thesaurus::load(path)?;
        Ok(self)
    }
}
