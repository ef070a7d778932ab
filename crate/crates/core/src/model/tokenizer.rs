//! Word-level tokenizer with hashed vocabulary buckets.
//!
//! Text is lowercased and split into alphanumeric words (apostrophes kept)
//! and single punctuation characters. Each token maps to one of
//! `vocab_size - SPECIAL_TOKENS` buckets by FNV-1a hash, so no vocabulary
//! file is needed.

use crate::data::normalize_whitespace;

pub const PAD_ID: u32 = 0;
pub const CLS_ID: u32 = 1;
pub const SEP_ID: u32 = 2;
pub const UNK_ID: u32 = 3;
pub const SPECIAL_TOKENS: u32 = 4;

/// Token ids for one question–answer pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub ids: Vec<u32>,
    /// Answer (or question) tokens were dropped to fit the length limit.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashTokenizer {
    vocab_size: u32,
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Lowercased word and punctuation tokens.
pub fn split_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() || (ch == '\'' && !word.is_empty()) {
            word.extend(ch.to_lowercase());
        } else {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !ch.is_whitespace() {
                out.push(ch.to_string());
            }
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

impl HashTokenizer {
    pub fn new(vocab_size: u32) -> Self {
        assert!(vocab_size > SPECIAL_TOKENS, "vocabulary too small");
        Self { vocab_size }
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn token_id(&self, token: &str) -> u32 {
        if token.is_empty() {
            return UNK_ID;
        }
        SPECIAL_TOKENS + (fnv1a(token) % u64::from(self.vocab_size - SPECIAL_TOKENS)) as u32
    }

    pub fn encode_text(&self, text: &str) -> Vec<u32> {
        split_tokens(text).iter().map(|t| self.token_id(t)).collect()
    }

    /// `[CLS] Question: q [SEP] Answer: a [SEP]`, at most `max_len` ids.
    /// The answer tail is dropped first; the question is cut only when it
    /// alone exceeds the budget.
    pub fn encode_pair(&self, question: &str, answer: &str, max_len: usize) -> Encoded {
        let mut q = self.encode_text(&format!("Question: {}", normalize_whitespace(question)));
        let mut a = self.encode_text(&format!("Answer: {}", normalize_whitespace(answer)));
        let budget = max_len.saturating_sub(3);
        let mut truncated = false;
        if q.len() + a.len() > budget {
            truncated = true;
            let keep_a = budget.saturating_sub(q.len());
            a.truncate(keep_a);
            q.truncate(budget);
        }
        let mut ids = Vec::with_capacity(q.len() + a.len() + 3);
        ids.push(CLS_ID);
        ids.extend(q);
        ids.push(SEP_ID);
        ids.extend(a);
        ids.push(SEP_ID);
        Encoded { ids, truncated }
    }
}
