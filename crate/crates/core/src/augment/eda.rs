//! Lexical augmentation on whitespace tokens: synonym replacement, random
//! insertion, random swap and random deletion.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use super::Thesaurus;
use crate::data::{QAPair, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdaOp {
    SynonymReplace,
    RandomInsert,
    RandomSwap,
    RandomDelete,
}

impl EdaOp {
    pub const ALL: [EdaOp; 4] = [EdaOp::SynonymReplace, EdaOp::RandomInsert, EdaOp::RandomSwap, EdaOp::RandomDelete];

    pub fn as_str(self) -> &'static str {
        match self {
            EdaOp::SynonymReplace => "synonym_replace",
            EdaOp::RandomInsert => "random_insert",
            EdaOp::RandomSwap => "random_swap",
            EdaOp::RandomDelete => "random_delete",
        }
    }

    pub fn apply<R: Rng>(self, tokens: &[String], p: f64, thesaurus: &Thesaurus, rng: &mut R) -> Vec<String> {
        match self {
            EdaOp::SynonymReplace => synonym_replace(tokens, p, thesaurus, rng),
            EdaOp::RandomInsert => random_insert(tokens, p, thesaurus, rng),
            EdaOp::RandomSwap => random_swap(tokens, p, rng),
            EdaOp::RandomDelete => random_delete(tokens, p, rng),
        }
    }
}

impl fmt::Display for EdaOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdaOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EdaOp::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| format!("unknown EDA operation {s:?}"))
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

/// Most positions any op may add or remove: `ceil(p·n)`.
pub fn max_changes(p: f64, n: usize) -> usize {
    (p * n as f64).ceil() as usize
}

/// Split `"(word),"` into `("(", "word", "),")`.
fn split_affixes(token: &str) -> (&str, &str, &str) {
    let start = token.find(|c: char| c.is_alphanumeric()).unwrap_or(token.len());
    let end = token
        .rfind(|c: char| c.is_alphanumeric())
        .map_or(start, |i| i + token[i..].chars().next().map_or(1, char::len_utf8));
    (&token[..start], &token[start..end], &token[end..])
}

fn match_case(template: &str, word: &str) -> String {
    if template.chars().next().is_some_and(char::is_uppercase) {
        let mut chars = word.chars();
        chars.next().map_or_else(String::new, |c| c.to_uppercase().chain(chars).collect())
    } else {
        word.to_string()
    }
}

/// Each token with a thesaurus entry is replaced with probability `p`;
/// punctuation around the word and a leading capital are kept.
pub fn synonym_replace<R: Rng>(tokens: &[String], p: f64, thesaurus: &Thesaurus, rng: &mut R) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            if !rng.gen_bool(p) {
                return t.clone();
            }
            let (pre, core, post) = split_affixes(t);
            match thesaurus.synonyms(core).choose(rng) {
                Some(syn) => format!("{pre}{}{post}", match_case(core, syn)),
                None => t.clone(),
            }
        })
        .collect()
}

/// Each token fires with probability `p` (at most `ceil(p·n)` firings); a
/// firing token with synonyms inserts one of them at a random position.
pub fn random_insert<R: Rng>(tokens: &[String], p: f64, thesaurus: &Thesaurus, rng: &mut R) -> Vec<String> {
    let cap = max_changes(p, tokens.len());
    let mut out = tokens.to_vec();
    let mut inserted = 0;
    for t in tokens {
        if !rng.gen_bool(p) || inserted == cap {
            continue;
        }
        let (_, core, _) = split_affixes(t);
        if let Some(syn) = thesaurus.synonyms(core).choose(rng) {
            let at = rng.gen_range(0..=out.len());
            out.insert(at, syn.clone());
            inserted += 1;
        }
    }
    out
}

/// `floor(p·n)` exchanges of two distinct random positions.
pub fn random_swap<R: Rng>(tokens: &[String], p: f64, rng: &mut R) -> Vec<String> {
    let n = tokens.len();
    let mut out = tokens.to_vec();
    if n < 2 {
        return out;
    }
    for _ in 0..(p * n as f64).floor() as usize {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        out.swap(i, j);
    }
    out
}

/// Each token is dropped with probability `p` (at most `ceil(p·n)` drops).
/// If nothing survives, one random token is kept.
pub fn random_delete<R: Rng>(tokens: &[String], p: f64, rng: &mut R) -> Vec<String> {
    let cap = max_changes(p, tokens.len());
    let mut dropped = 0;
    let keep: Vec<bool> = tokens
        .iter()
        .map(|_| {
            let drop = rng.gen_bool(p) && dropped < cap;
            dropped += usize::from(drop);
            !drop
        })
        .collect();
    let mut out: Vec<String> = tokens.iter().zip(&keep).filter(|(_, &k)| k).map(|(t, _)| t.clone()).collect();
    if out.is_empty() && !tokens.is_empty() {
        out.push(tokens[rng.gen_range(0..tokens.len())].clone());
    }
    out
}

/// Paraphrase the answer with one uniformly chosen operation. The question,
/// labels and features are copied; the result is marked paraphrase-synthetic
/// and remembers its seed record and operation in `meta`.
pub fn eda_augment<R: Rng>(pair: &QAPair, p: f64, thesaurus: &Thesaurus, rng: &mut R) -> QAPair {
    let op = *EdaOp::ALL.choose(rng).expect("non-empty");
    let tokens = tokenize(&pair.answer);
    let mut out = pair.clone().with_source(Source::ParaphraseSynthetic);
    out.meta.insert("derived_from".into(), pair.id.clone());
    out.meta.insert("augment_op".into(), op.to_string());
    if tokens.is_empty() {
        log::warn!("record {}: empty answer left unchanged", pair.id);
        return out;
    }
    out.answer = op.apply(&tokens, p, thesaurus, rng).join(" ");
    out
}
