//! The two-level label taxonomy.
//!
//! Integer codes are stable: they index confusion matrices, logits and
//! prediction files. Display names and accepted aliases come from the
//! bundled `labels.tsv` table.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::DataError;

const LABEL_TABLE: &str = include_str!("../../resources/labels.tsv");

/// Top-level clarity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClarityLabel {
    ClearReply = 0,
    Ambivalent = 1,
    ClearNonReply = 2,
}

/// Fine-grained evasion technique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EvasionLabel {
    Explicit = 0,
    Implicit = 1,
    General = 2,
    Partial = 3,
    Dodging = 4,
    Deflection = 5,
    Declining = 6,
    ClaimsIgnorance = 7,
    Clarification = 8,
}

impl ClarityLabel {
    pub const ALL: [ClarityLabel; 3] = [
        ClarityLabel::ClearReply,
        ClarityLabel::Ambivalent,
        ClarityLabel::ClearNonReply,
    ];
    pub const COUNT: usize = 3;

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        table().clarity_names[self.code()].as_str()
    }
}

impl EvasionLabel {
    pub const ALL: [EvasionLabel; 9] = [
        EvasionLabel::Explicit,
        EvasionLabel::Implicit,
        EvasionLabel::General,
        EvasionLabel::Partial,
        EvasionLabel::Dodging,
        EvasionLabel::Deflection,
        EvasionLabel::Declining,
        EvasionLabel::ClaimsIgnorance,
        EvasionLabel::Clarification,
    ];
    pub const COUNT: usize = 9;

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        table().evasion_names[self.code()].as_str()
    }

    /// Parent clarity class of this technique.
    pub fn clarity(self) -> ClarityLabel {
        map_evasion_to_clarity(self)
    }
}

/// Total map from the nine evasion techniques onto the three clarity classes.
pub fn map_evasion_to_clarity(e: EvasionLabel) -> ClarityLabel {
    use EvasionLabel::*;
    match e {
        Explicit => ClarityLabel::ClearReply,
        Implicit | General | Partial | Dodging | Deflection => ClarityLabel::Ambivalent,
        Declining | ClaimsIgnorance | Clarification => ClarityLabel::ClearNonReply,
    }
}

/// Which head of the taxonomy a model is trained against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Task {
    #[default]
    Clarity,
    Evasion,
}

impl Task {
    pub fn num_classes(self) -> usize {
        match self {
            Task::Clarity => ClarityLabel::COUNT,
            Task::Evasion => EvasionLabel::COUNT,
        }
    }

    pub fn label_names(self) -> Vec<String> {
        match self {
            Task::Clarity => ClarityLabel::ALL.iter().map(|l| l.name().to_string()).collect(),
            Task::Evasion => EvasionLabel::ALL.iter().map(|l| l.name().to_string()).collect(),
        }
    }

    /// Display name for a class code under this task.
    pub fn label_name(self, code: usize) -> Option<&'static str> {
        match self {
            Task::Clarity => ClarityLabel::from_code(code).map(ClarityLabel::name),
            Task::Evasion => EvasionLabel::from_code(code).map(EvasionLabel::name),
        }
    }

    /// Resolve a label string under this task to its code.
    pub fn parse_label(self, s: &str) -> Result<usize, DataError> {
        match self {
            Task::Clarity => s.parse::<ClarityLabel>().map(ClarityLabel::code),
            Task::Evasion => s.parse::<EvasionLabel>().map(EvasionLabel::code),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Clarity => "clarity",
            Task::Evasion => "evasion",
        })
    }
}

impl FromStr for Task {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "clarity" | "task1" | "1" => Ok(Task::Clarity),
            "evasion" | "task2" | "2" => Ok(Task::Evasion),
            _ => Err(DataError::UnknownLabel {
                value: s.to_string(),
                kind: "task",
            }),
        }
    }
}

struct LabelTable {
    clarity_names: Vec<String>,
    evasion_names: Vec<String>,
    // (normalized alias, code)
    clarity_aliases: Vec<(String, usize)>,
    evasion_aliases: Vec<(String, usize)>,
}

fn normalize(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn table() -> &'static LabelTable {
    static TABLE: OnceLock<LabelTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = LabelTable {
            clarity_names: vec![String::new(); ClarityLabel::COUNT],
            evasion_names: vec![String::new(); EvasionLabel::COUNT],
            clarity_aliases: Vec::new(),
            evasion_aliases: Vec::new(),
        };
        for line in LABEL_TABLE.lines() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let code: usize = cols[1].trim().parse().expect("labels.tsv: bad code");
            let name = cols[2].trim().to_string();
            let aliases = cols.get(3).copied().unwrap_or("");
            let (names, alias_list) = match cols[0].trim() {
                "clarity" => (&mut t.clarity_names, &mut t.clarity_aliases),
                "evasion" => (&mut t.evasion_names, &mut t.evasion_aliases),
                other => panic!("labels.tsv: unknown task {other}"),
            };
            alias_list.push((normalize(&name), code));
            // Enum-style identifiers are always accepted.
            alias_list.push((normalize(&format!("{code}")), code));
            for a in aliases.split(',').map(str::trim).filter(|a| !a.is_empty()) {
                alias_list.push((normalize(a), code));
            }
            names[code] = name;
        }
        for (code, l) in ClarityLabel::ALL.iter().enumerate() {
            t.clarity_aliases.push((normalize(&format!("{l:?}")), code));
        }
        for (code, l) in EvasionLabel::ALL.iter().enumerate() {
            t.evasion_aliases.push((normalize(&format!("{l:?}")), code));
        }
        t
    })
}

fn lookup(aliases: &[(String, usize)], s: &str) -> Option<usize> {
    let key = normalize(s);
    aliases.iter().find(|(a, _)| *a == key).map(|(_, c)| *c)
}

impl FromStr for ClarityLabel {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        lookup(&table().clarity_aliases, s)
            .and_then(ClarityLabel::from_code)
            .ok_or_else(|| DataError::UnknownLabel {
                value: s.to_string(),
                kind: "clarity",
            })
    }
}

impl FromStr for EvasionLabel {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        lookup(&table().evasion_aliases, s)
            .and_then(EvasionLabel::from_code)
            .ok_or_else(|| DataError::UnknownLabel {
                value: s.to_string(),
                kind: "evasion",
            })
    }
}

impl fmt::Display for ClarityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for EvasionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hierarchy_matches_grouping() {
        use ClarityLabel::*;
        use EvasionLabel::*;
        let expected = [
            (Explicit, ClearReply),
            (Implicit, Ambivalent),
            (General, Ambivalent),
            (Partial, Ambivalent),
            (Dodging, Ambivalent),
            (Deflection, Ambivalent),
            (Declining, ClearNonReply),
            (ClaimsIgnorance, ClearNonReply),
            (Clarification, ClearNonReply),
        ];
        assert_eq!(expected.len(), EvasionLabel::COUNT);
        for (e, c) in expected {
            assert_eq!(map_evasion_to_clarity(e), c, "{e:?}");
        }
    }

    #[test]
    fn codes_are_stable() {
        assert_eq!(ClarityLabel::ClearReply.code(), 0);
        assert_eq!(ClarityLabel::Ambivalent.code(), 1);
        assert_eq!(ClarityLabel::ClearNonReply.code(), 2);
        assert_eq!(EvasionLabel::Clarification.code(), 8);
        for l in EvasionLabel::ALL {
            assert_eq!(EvasionLabel::from_code(l.code()), Some(l));
        }
    }

    #[test]
    fn parses_names_and_aliases() {
        assert_eq!("Clear Reply".parse::<ClarityLabel>().unwrap(), ClarityLabel::ClearReply);
        assert_eq!("clear non-reply".parse::<ClarityLabel>().unwrap(), ClarityLabel::ClearNonReply);
        assert_eq!("ClearNonReply".parse::<ClarityLabel>().unwrap(), ClarityLabel::ClearNonReply);
        assert_eq!("1".parse::<ClarityLabel>().unwrap(), ClarityLabel::Ambivalent);
        assert_eq!(
            "Partial/half-answer".parse::<EvasionLabel>().unwrap(),
            EvasionLabel::Partial
        );
        assert_eq!(
            "Declining to answer".parse::<EvasionLabel>().unwrap(),
            EvasionLabel::Declining
        );
        let err = "Maybe".parse::<ClarityLabel>().unwrap_err();
        assert!(err.to_string().contains("Maybe"));
    }

    #[test]
    fn display_round_trips() {
        for l in ClarityLabel::ALL {
            assert_eq!(l.to_string().parse::<ClarityLabel>().unwrap(), l);
        }
        for l in EvasionLabel::ALL {
            assert_eq!(l.to_string().parse::<EvasionLabel>().unwrap(), l);
        }
    }
}
