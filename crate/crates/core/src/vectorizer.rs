//! Word n-gram TF-IDF features.
//!
//! Term frequency is the raw count, IDF is smoothed as
//! `ln((1 + N) / (1 + df)) + 1`, and documents are optionally L2-normalized.
//! Vocabulary indices follow lexicographic token order, so two fits over
//! the same corpus serialize identically.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Joins the words of an n-gram into a single token.
pub const NGRAM_SEPARATOR: char = '\u{241F}';

#[derive(Debug, Error, PartialEq)]
pub enum VectorizerError {
    #[error("cannot fit a vectorizer on an empty corpus")]
    EmptyCorpus,
    #[error("invalid vectorizer config: {0}")]
    InvalidConfig(String),
    #[error("inconsistent serialized model: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TfIdfConfig {
    pub min_df: usize,
    pub max_vocab: Option<usize>,
    pub ngram_max: usize,
    pub l2_normalize: bool,
}

impl Default for TfIdfConfig {
    fn default() -> Self {
        Self {
            min_df: 1,
            max_vocab: None,
            ngram_max: 1,
            l2_normalize: true,
        }
    }
}

/// Whitespace tokens followed by every contiguous n-gram up to `ngram_max`.
///
/// Output order is all unigrams, then all bigrams, and so on.
pub fn tokenize(text: &str, ngram_max: usize) -> Vec<String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    for n in 1..=ngram_max.max(1) {
        if n > words.len() {
            break;
        }
        for window in words.windows(n) {
            let mut tok = String::from(window[0]);
            for w in &window[1..] {
                tok.push(NGRAM_SEPARATOR);
                tok.push_str(w);
            }
            out.push(tok);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
    document_frequency: Vec<usize>,
    n_documents: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    dimension: usize,
}

impl SparseVector {
    /// Builds a vector from unordered entries; zeros are dropped and
    /// repeated indices summed.
    pub fn from_entries(dimension: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, w) in entries {
            assert!(i < dimension, "index {i} out of bounds for dimension {dimension}");
            *acc.entry(i).or_default() += w;
        }
        Self {
            entries: acc.into_iter().filter(|(_, w)| *w != 0.0).collect(),
            dimension,
        }
    }

    pub fn zeros(dimension: usize) -> Self {
        Self {
            entries: Vec::new(),
            dimension,
        }
    }

    pub fn one_hot(dimension: usize, index: usize) -> Self {
        Self::from_entries(dimension, [(index, 1.0)])
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |(i, _)| *i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|(i, w)| w * dense[*i]).sum()
    }

    /// Multiplies every weight by `factor` (non-zero).
    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_entries(self.dimension, self.entries.iter().map(|(i, w)| (*i, w * factor)))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dimension];
        for (i, w) in &self.entries {
            d[*i] = *w;
        }
        d
    }
}

/// A fitted TF-IDF vectorizer.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    vocab: Vocabulary,
    idf: Vec<f64>,
    config: TfIdfConfig,
}

fn smoothed_idf(n_documents: usize, df: usize) -> f64 {
    ((1.0 + n_documents as f64) / (1.0 + df as f64)).ln() + 1.0
}

impl TfIdfModel {
    pub fn fit<S: AsRef<str>>(corpus: &[S], config: &TfIdfConfig) -> Result<Self, VectorizerError> {
        if corpus.is_empty() {
            return Err(VectorizerError::EmptyCorpus);
        }
        if config.ngram_max == 0 {
            return Err(VectorizerError::InvalidConfig("ngram_max must be >= 1".into()));
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in corpus {
            let distinct: BTreeSet<String> = tokenize(doc.as_ref(), config.ngram_max).into_iter().collect();
            for tok in distinct {
                *df.entry(tok).or_default() += 1;
            }
        }
        let mut kept: Vec<(String, usize)> = df.into_iter().filter(|(_, d)| *d >= config.min_df).collect();
        if let Some(cap) = config.max_vocab {
            if kept.len() > cap {
                kept.sort_by(|(ta, da), (tb, db)| db.cmp(da).then_with(|| ta.cmp(tb)));
                kept.truncate(cap);
                kept.sort_by(|(ta, _), (tb, _)| ta.cmp(tb));
            }
        }
        let n_documents = corpus.len();
        let idf = kept.iter().map(|(_, d)| smoothed_idf(n_documents, *d)).collect();
        let (tokens, document_frequency): (Vec<String>, Vec<usize>) = kept.into_iter().unzip();
        Ok(Self {
            vocab: build_vocab(tokens, document_frequency, n_documents),
            idf,
            config: config.clone(),
        })
    }

    pub fn transform(&self, text: &str) -> SparseVector {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for tok in tokenize(text, self.config.ngram_max) {
            if let Some(i) = self.vocab.index_of(&tok) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        let mut entries: Vec<(usize, f64)> = counts.into_iter().map(|(i, c)| (i, c * self.idf[i])).collect();
        if self.config.l2_normalize {
            let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, w) in &mut entries {
                    *w /= norm;
                }
            }
        }
        SparseVector {
            entries,
            dimension: self.dimension(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn config(&self) -> &TfIdfConfig {
        &self.config
    }

    pub fn idf_of(&self, token: &str) -> Option<f64> {
        self.vocab.index_of(token).map(|i| self.idf[i])
    }
}

fn build_vocab(tokens: Vec<String>, document_frequency: Vec<usize>, n_documents: usize) -> Vocabulary {
    let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Vocabulary {
        tokens,
        index,
        document_frequency,
        n_documents,
    }
}

/// On-disk layout of a [`TfIdfModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfIdfRecord {
    pub config: TfIdfConfig,
    pub n_documents: usize,
    pub tokens: Vec<String>,
    pub document_frequency: Vec<usize>,
    pub idf: Vec<f64>,
}

impl From<&TfIdfModel> for TfIdfRecord {
    fn from(m: &TfIdfModel) -> Self {
        Self {
            config: m.config.clone(),
            n_documents: m.vocab.n_documents,
            tokens: m.vocab.tokens.clone(),
            document_frequency: m.vocab.document_frequency.clone(),
            idf: m.idf.clone(),
        }
    }
}

impl TryFrom<TfIdfRecord> for TfIdfModel {
    type Error = VectorizerError;

    fn try_from(r: TfIdfRecord) -> Result<Self, Self::Error> {
        let bad = |msg: &str| Err(VectorizerError::Inconsistent(msg.into()));
        let v = r.tokens.len();
        if r.document_frequency.len() != v || r.idf.len() != v {
            return bad("token, df and idf arrays differ in length");
        }
        if r.tokens.windows(2).any(|w| w[0] >= w[1]) {
            return bad("tokens are not in strictly increasing order");
        }
        if r.document_frequency.iter().any(|d| *d == 0 || *d > r.n_documents) {
            return bad("document frequency outside 1..=n_documents");
        }
        if r.idf.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return bad("idf weights must be finite and positive");
        }
        if r.config.ngram_max == 0 {
            return bad("ngram_max must be >= 1");
        }
        Ok(Self {
            vocab: build_vocab(r.tokens, r.document_frequency, r.n_documents),
            idf: r.idf,
            config: r.config,
        })
    }
}
