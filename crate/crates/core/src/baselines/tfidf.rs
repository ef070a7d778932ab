//! Word n-gram TF-IDF features.
//!
//! Tokens are runs of two or more word characters after lowercasing; stop
//! words are removed before n-grams are formed. Inverse document frequency
//! is smoothed, `ln((1 + n) / (1 + df)) + 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::BaselineError;

const STOPWORDS: &str = include_str!("../../resources/stopwords_en.txt");

pub fn english_stopwords() -> BTreeSet<String> {
    crate::augment::list_lines(STOPWORDS).into_iter().collect()
}

/// Row-major sparse matrix; each row holds `(column, value)` sorted by column.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub n_cols: usize,
}

impl SparseMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn select(&self, indices: &[usize]) -> SparseMatrix {
        SparseMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            n_cols: self.n_cols,
        }
    }

    /// Value at (`r`, `c`), 0 when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = &self.rows[r];
        row.binary_search_by_key(&c, |&(j, _)| j).map_or(0.0, |k| row[k].1)
    }

    pub fn dot_dense(&self, r: usize, w: &[f64]) -> f64 {
        self.rows[r].iter().map(|&(j, v)| v * w[j]).sum()
    }

    pub fn row_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
        let (mut i, mut j, mut s) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0.0; self.n_cols];
                for &(j, v) in row {
                    d[j] = v;
                }
                d
            })
            .collect()
    }

    /// Variance over every entry, zeros included.
    pub fn variance(&self) -> f64 {
        let n = (self.n_rows() * self.n_cols) as f64;
        if n == 0.0 {
            return 0.0;
        }
        let (s, s2) = self
            .rows
            .iter()
            .flatten()
            .fold((0.0, 0.0), |(s, s2), &(_, v)| (s + v, s2 + v * v));
        let mean = s / n;
        s2 / n - mean * mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfConfig {
    pub max_features: Option<usize>,
    pub ngram_range: (usize, usize),
    /// Minimum number of documents containing a term.
    pub min_df: usize,
    /// Maximum fraction of documents containing a term.
    pub max_df: f64,
    pub stopwords: BTreeSet<String>,
    pub sublinear_tf: bool,
    pub l2_normalize: bool,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        Self {
            max_features: Some(5000),
            ngram_range: (1, 2),
            min_df: 2,
            max_df: 0.95,
            stopwords: english_stopwords(),
            sublinear_tf: false,
            l2_normalize: true,
        }
    }
}

impl TfidfConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        let (lo, hi) = self.ngram_range;
        if self.min_df == 0 || !(self.max_df > 0.0 && self.max_df <= 1.0) || lo == 0 || hi < lo {
            return Err(BaselineError::InvalidConfig(format!(
                "tf-idf: min_df {} max_df {} ngram_range ({lo}, {hi})",
                self.min_df, self.max_df
            )));
        }
        Ok(())
    }
}

/// Lowercased runs of at least two word characters.
pub fn word_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in lower.chars() {
        if ch.is_alphanumeric() || ch == '_' {
            cur.push(ch);
        } else {
            if cur.chars().count() >= 2 {
                out.push(cur.clone());
            }
            cur.clear();
        }
    }
    if cur.chars().count() >= 2 {
        out.push(cur);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfVectorizer {
    cfg: TfidfConfig,
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
}

impl TfidfVectorizer {
    pub fn analyze(cfg: &TfidfConfig, text: &str) -> Vec<String> {
        let words: Vec<String> = word_tokens(text).into_iter().filter(|w| !cfg.stopwords.contains(w)).collect();
        let (lo, hi) = cfg.ngram_range;
        let mut grams = Vec::new();
        for n in lo..=hi {
            if n > words.len() {
                break;
            }
            grams.extend(words.windows(n).map(|w| w.join(" ")));
        }
        grams
    }

    /// Learn vocabulary and idf from `corpus`.
    pub fn fit(corpus: &[String], cfg: TfidfConfig) -> Result<Self, BaselineError> {
        cfg.validate()?;
        if corpus.is_empty() {
            return Err(BaselineError::EmptyTraining);
        }
        let n_docs = corpus.len();
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for doc in corpus {
            let grams = Self::analyze(&cfg, doc);
            for g in &grams {
                *tf.entry(g.clone()).or_default() += 1;
            }
            for g in grams.into_iter().collect::<BTreeSet<_>>() {
                *df.entry(g).or_default() += 1;
            }
        }
        let max_docs = cfg.max_df * n_docs as f64;
        let mut kept: Vec<(String, usize)> = df
            .iter()
            .filter(|(_, &d)| d >= cfg.min_df && d as f64 <= max_docs)
            .map(|(t, _)| (t.clone(), tf[t]))
            .collect();
        if let Some(limit) = cfg.max_features {
            if kept.len() > limit {
                // Stable: equal frequencies keep lexicographic order.
                kept.sort_by(|a, b| b.1.cmp(&a.1));
                kept.truncate(limit);
                kept.sort_by(|a, b| a.0.cmp(&b.0));
            }
        }
        if kept.is_empty() {
            return Err(BaselineError::EmptyVocabulary);
        }
        let vocabulary: Vec<String> = kept.into_iter().map(|(t, _)| t).collect();
        let idf = vocabulary
            .iter()
            .map(|t| ((1.0 + n_docs as f64) / (1.0 + df[t] as f64)).ln() + 1.0)
            .collect();
        let index = vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Self {
            cfg,
            vocabulary,
            index,
            idf,
        })
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn transform(&self, docs: &[String]) -> SparseMatrix {
        let rows = docs
            .iter()
            .map(|doc| {
                let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
                for g in Self::analyze(&self.cfg, doc) {
                    if let Some(&j) = self.index.get(&g) {
                        *counts.entry(j).or_default() += 1.0;
                    }
                }
                let mut row: Vec<(usize, f64)> = counts
                    .into_iter()
                    .map(|(j, c)| {
                        let tf = if self.cfg.sublinear_tf { 1.0 + c.ln() } else { c };
                        (j, tf * self.idf[j])
                    })
                    .collect();
                if self.cfg.l2_normalize {
                    let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        row.iter_mut().for_each(|(_, v)| *v /= norm);
                    }
                }
                row
            })
            .collect();
        SparseMatrix {
            rows,
            n_cols: self.vocabulary.len(),
        }
    }
}

/// Fit on `corpus` and transform it.
pub fn tfidf_vectorize(corpus: &[String], cfg: TfidfConfig) -> Result<(TfidfVectorizer, SparseMatrix), BaselineError> {
    let v = TfidfVectorizer::fit(corpus, cfg)?;
    let m = v.transform(corpus);
    Ok((v, m))
}
