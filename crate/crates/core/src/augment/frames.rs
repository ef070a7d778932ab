//! Rhetorical frames: answer skeletons of one class with content spans
//! replaced by slot markers.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::{ClarityLabel, Dataset};

pub const TOPIC_SLOT: &str = "{TOPIC}";
pub const ENTITY_SLOT: &str = "{ENTITY}";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhetoricalFrame {
    pub template: String,
    pub label: ClarityLabel,
    /// Number of distinct answers the frame was mined from.
    pub origin_count: usize,
}

impl RhetoricalFrame {
    /// Fails unless the template is non-empty and has a slot marker.
    pub fn new(template: impl Into<String>, label: ClarityLabel, origin_count: usize) -> Option<Self> {
        let template = template.into();
        let ok = !template.trim().is_empty() && (template.contains(TOPIC_SLOT) || template.contains(ENTITY_SLOT));
        ok.then_some(Self {
            template,
            label,
            origin_count,
        })
    }

    /// Replace `{TOPIC}` with `topic` and `{ENTITY}` with `entity`.
    pub fn fill(&self, topic: &str, entity: &str) -> String {
        self.template.replace(TOPIC_SLOT, topic).replace(ENTITY_SLOT, entity)
    }
}

fn clauses(text: &str) -> impl Iterator<Item = &str> {
    text.split(['.', '!', '?', ';', ':']).map(str::trim).filter(|c| !c.is_empty())
}

fn bare(token: &str) -> String {
    token
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

fn is_entity_like(token: &str) -> bool {
    let core = token.trim_matches(|c: char| !c.is_alphanumeric());
    core.chars().next().is_some_and(char::is_uppercase) && core != "I" && !core.starts_with("I'")
}

/// Skeleton of one clause: everything up to the last anchor word, then a
/// topic slot. Capitalized words after the first become entity slots.
/// Clauses without an anchor followed by content yield nothing.
pub fn clause_frame(clause: &str, anchors: &[String]) -> Option<String> {
    let tokens: Vec<&str> = clause.split_whitespace().collect();
    let last_anchor = (0..tokens.len().saturating_sub(1)).rev().find(|&i| anchors.iter().any(|a| *a == bare(tokens[i])))?;
    let mut parts: Vec<String> = Vec::with_capacity(last_anchor + 2);
    for (i, t) in tokens[..=last_anchor].iter().enumerate() {
        if i > 0 && is_entity_like(t) {
            if parts.last().map(String::as_str) != Some(ENTITY_SLOT) {
                parts.push(ENTITY_SLOT.to_string());
            }
        } else {
            parts.push(t.trim_end_matches([',', '"', '\'']).to_string());
        }
    }
    parts.push(TOPIC_SLOT.to_string());
    Some(parts.join(" "))
}

/// Frames of `label` answers with support ≥ `min_support`, most supported
/// first, then lexicographic.
pub fn extract_frames(d: &Dataset, label: ClarityLabel, anchors: &[String], min_support: usize) -> Vec<RhetoricalFrame> {
    let mut support: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for r in d.iter().filter(|r| r.clarity == Some(label)) {
        for clause in clauses(&r.answer) {
            if let Some(t) = clause_frame(clause, anchors) {
                support.entry(t).or_default().insert(r.answer.as_str());
            }
        }
    }
    let mut frames: Vec<RhetoricalFrame> = support
        .into_iter()
        .filter(|(_, answers)| answers.len() >= min_support.max(1))
        .filter_map(|(t, answers)| RhetoricalFrame::new(t, label, answers.len()))
        .collect();
    frames.sort_by(|a, b| b.origin_count.cmp(&a.origin_count).then_with(|| a.template.cmp(&b.template)));
    frames
}

/// Fallback when mining finds nothing: every distinct answer of the class
/// becomes `As for {TOPIC}, <answer>`.
pub fn whole_answer_frames(d: &Dataset, label: ClarityLabel) -> Vec<RhetoricalFrame> {
    let answers: BTreeSet<&str> = d.iter().filter(|r| r.clarity == Some(label)).map(|r| r.answer.trim()).collect();
    answers
        .into_iter()
        .filter_map(|a| {
            let mut chars = a.chars();
            let first = chars.next()?;
            let body: String = if a.starts_with("I ") || a.starts_with("I'") {
                a.to_string()
            } else {
                first.to_lowercase().chain(chars).collect()
            };
            RhetoricalFrame::new(format!("As for {TOPIC_SLOT}, {body}"), label, 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::AugmentResources;
    use crate::data::QAPair;

    fn anchors() -> Vec<String> {
        AugmentResources::bundled().slot_anchors
    }

    fn corpus(items: &[(&str, ClarityLabel)]) -> Dataset {
        Dataset::new(
            "c",
            items
                .iter()
                .enumerate()
                .map(|(i, (a, l))| QAPair::new(format!("r{i}"), "Q?", *a).unwrap().with_clarity(*l).unwrap())
                .collect(),
        )
    }

    #[test]
    fn reference_non_reply_frame() {
        let d = corpus(&[("I cannot comment on ongoing diplomatic discussions.", ClarityLabel::ClearNonReply)]);
        let frames = extract_frames(&d, ClarityLabel::ClearNonReply, &anchors(), 1);
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].template, "I cannot comment on {TOPIC}");
        assert_eq!(frames[0].fill("budget discussions", "x"), "I cannot comment on budget discussions");
    }

    #[test]
    fn empty_dataset_gives_no_frames() {
        assert!(extract_frames(&Dataset::new("e", vec![]), ClarityLabel::ClearReply, &anchors(), 1).is_empty());
    }

    #[test]
    fn support_counts_distinct_answers_and_orders() {
        let d = corpus(&[
            ("I cannot comment on the trade talks. I cannot comment on the trade talks.", ClarityLabel::ClearNonReply),
            ("I cannot comment on ongoing matters.", ClarityLabel::ClearNonReply),
            ("We told Senator Smith about the plan", ClarityLabel::ClearNonReply),
            ("Yes, we will vote for it", ClarityLabel::ClearReply),
            ("No", ClarityLabel::ClearNonReply),
        ]);
        let frames = extract_frames(&d, ClarityLabel::ClearNonReply, &anchors(), 1);
        let got: Vec<(&str, usize)> = frames.iter().map(|f| (f.template.as_str(), f.origin_count)).collect();
        assert_eq!(
            got,
            vec![("I cannot comment on {TOPIC}", 2), ("We told {ENTITY} about {TOPIC}", 1)]
        );
        assert_eq!(extract_frames(&d, ClarityLabel::ClearNonReply, &anchors(), 2).len(), 1);
        assert!(frames.iter().all(|f| f.label == ClarityLabel::ClearNonReply));
    }

    #[test]
    fn two_answer_class_yields_a_frame() {
        // brute force: every clause with an anchor before its last token gives one skeleton
        let d = corpus(&[
            ("We are working on it. Ask me later", ClarityLabel::Ambivalent),
            ("That depends on the details", ClarityLabel::Ambivalent),
            ("Yes.", ClarityLabel::ClearReply),
            ("Absolutely, we support it.", ClarityLabel::ClearReply),
            ("No comment.", ClarityLabel::ClearNonReply),
        ]);
        let frames = extract_frames(&d, ClarityLabel::Ambivalent, &anchors(), 1);
        assert!(!frames.is_empty());
        assert!(frames.iter().any(|f| f.template == "That depends on {TOPIC}"));
        // "We are working on it" has "on" before its last token too
        assert!(frames.iter().any(|f| f.template == "We are working on {TOPIC}"));
    }

    #[test]
    fn fallback_frames_keep_a_slot() {
        let d = corpus(&[("Absolutely.", ClarityLabel::ClearReply), ("I do.", ClarityLabel::ClearReply)]);
        let frames = whole_answer_frames(&d, ClarityLabel::ClearReply);
        let t: Vec<&str> = frames.iter().map(|f| f.template.as_str()).collect();
        assert_eq!(t, vec!["As for {TOPIC}, absolutely.", "As for {TOPIC}, I do."]);
        assert!(RhetoricalFrame::new("no slots", ClarityLabel::ClearReply, 1).is_none());
    }
}
