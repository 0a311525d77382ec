//! Text embedding models trained from scratch on a caption corpus.
//!
//! Five methods map words (and documents) into the `D`-dimensional space that
//! later serves as the joint text-image space: Word2Vec (CBOW), GloVe, LDA,
//! Doc2Vec (PV-DM) and FastText (subword skip-gram). Word-level methods embed
//! a document as the plain or tf-idf weighted mean of its word vectors; LDA
//! and Doc2Vec additionally offer native document inference.

mod config;
pub mod doc2vec;
pub mod fasttext;
pub mod glove;
mod io;
pub mod lda;
pub mod sgns;
#[cfg(test)]
mod testutil;
pub mod word2vec;

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{Doc2VecConfig, FastTextConfig, GloveConfig, LdaConfig, TextConfig, Word2VecConfig, DEFAULT_DIM};
pub use io::{read_model, write_model, MODEL_MAGIC, MODEL_VERSION};

use crate::corpus::{vocab_weighted_terms, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Word2Vec,
    Glove,
    Lda,
    Doc2Vec,
    FastText,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Word2Vec,
        Method::Glove,
        Method::Lda,
        Method::Doc2Vec,
        Method::FastText,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Word2Vec => "word2vec",
            Method::Glove => "glove",
            Method::Lda => "lda",
            Method::Doc2Vec => "doc2vec",
            Method::FastText => "fasttext",
        }
    }

    /// Tag byte used in the model file.
    pub fn tag(self) -> u8 {
        match self {
            Method::Word2Vec => 1,
            Method::Glove => 2,
            Method::Lda => 3,
            Method::Doc2Vec => 4,
            Method::FastText => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.tag() == tag)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::param(format!("unknown text embedding method `{s}`")))
    }
}

/// How a document becomes a single vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Mean,
    TfidfMean,
    /// Method inference: LDA fold-in or Doc2Vec paragraph-vector inference.
    Native,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Mean => "mean",
            Aggregation::TfidfMean => "tfidf_mean",
            Aggregation::Native => "native",
        }
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "tfidf_mean" | "tfidf" | "tf-idf" => Ok(Aggregation::TfidfMean),
            "native" => Ok(Aggregation::Native),
            _ => Err(Error::param(format!("unknown aggregation `{s}`"))),
        }
    }
}

/// A word or document vector in the joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct TextEmbedding(pub Vec<f64>);

impl TextEmbedding {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for TextEmbedding {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Method-specific state beyond the word vector table.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodState {
    Plain,
    Lda(lda::LdaState),
    FastText(fasttext::SubwordTable),
    Doc2Vec(doc2vec::DocTable),
}

/// A trained text embedding model.
#[derive(Debug, Clone, PartialEq)]
pub struct TextEmbeddingModel {
    pub(crate) method: Method,
    pub(crate) dim: usize,
    pub(crate) vocab: Vocabulary,
    /// Row-major `|V| x dim` word vectors (LDA: `P(topic | word)` rows).
    pub(crate) vectors: Vec<f32>,
    pub(crate) state: MethodState,
    pub(crate) config: TextConfig,
}

impl TextEmbeddingModel {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn config(&self) -> &TextConfig {
        &self.config
    }

    pub fn state(&self) -> &MethodState {
        &self.state
    }

    /// The stored row of vocabulary entry `idx`.
    pub fn word_row(&self, idx: u32) -> &[f32] {
        &self.vectors[idx as usize * self.dim..(idx as usize + 1) * self.dim]
    }

    /// Embeds a single token.
    ///
    /// Only FastText can embed out-of-vocabulary tokens (from their character
    /// n-grams); the other methods return [`Error::OutOfVocabulary`].
    pub fn embed_word(&self, token: &str) -> Result<TextEmbedding> {
        let idx = self.vocab.get(token);
        match (&self.state, idx) {
            (MethodState::FastText(table), idx) => {
                if token.is_empty() {
                    return Err(Error::OutOfVocabulary(String::new()));
                }
                let mut v: Vec<f64> = table.ngram_sum(token, self.dim);
                if let Some(i) = idx {
                    for (a, &b) in v.iter_mut().zip(self.word_row(i)) {
                        *a += b as f64;
                    }
                }
                Ok(TextEmbedding(v))
            }
            (_, Some(i)) => Ok(TextEmbedding(self.word_row(i).iter().map(|&x| x as f64).collect())),
            (_, None) => Err(Error::OutOfVocabulary(token.to_owned())),
        }
    }

    fn embeddable(&self, token: &str) -> bool {
        match self.state {
            MethodState::FastText(_) => !token.is_empty(),
            _ => self.vocab.get(token).is_some(),
        }
    }

    /// Embeds a tokenized document with the chosen aggregation.
    pub fn embed_document(&self, tokens: &[String], aggregation: Aggregation) -> Result<TextEmbedding> {
        match aggregation {
            Aggregation::Mean => {
                let mut out = vec![0.0; self.dim];
                let mut n = 0usize;
                for tok in tokens.iter().filter(|t| self.embeddable(t)) {
                    let v = self.embed_word(tok)?;
                    out.iter_mut().zip(v.iter()).for_each(|(a, b)| *a += b);
                    n += 1;
                }
                if n == 0 {
                    return Err(Error::AllOutOfVocabulary);
                }
                out.iter_mut().for_each(|a| *a /= n as f64);
                Ok(TextEmbedding(out))
            }
            Aggregation::TfidfMean => {
                let keep_oov = matches!(self.state, MethodState::FastText(_));
                let embeddable: Vec<String> = tokens.iter().filter(|t| self.embeddable(t)).cloned().collect();
                let weights = vocab_weighted_terms(&embeddable, &self.vocab, keep_oov)?;
                let mut out = vec![0.0; self.dim];
                for (tok, w) in weights {
                    let v = self.embed_word(&tok)?;
                    out.iter_mut().zip(v.iter()).for_each(|(a, b)| *a += w * b);
                }
                Ok(TextEmbedding(out))
            }
            Aggregation::Native => match &self.state {
                MethodState::Lda(state) => {
                    let ids = self.known_ids(tokens)?;
                    let cfg = match &self.config {
                        TextConfig::Lda(c) => c,
                        _ => unreachable!("lda state implies lda config"),
                    };
                    Ok(TextEmbedding(state.fold_in(&ids, self.vocab.len(), cfg)))
                }
                MethodState::Doc2Vec(table) => {
                    let ids = self.known_ids(tokens)?;
                    let cfg = match &self.config {
                        TextConfig::Doc2vec(c) => c,
                        _ => unreachable!("doc2vec state implies doc2vec config"),
                    };
                    Ok(TextEmbedding(doc2vec::infer(self, table, &ids, cfg)))
                }
                _ => Err(Error::UnsupportedAggregation {
                    method: self.method.name(),
                    aggregation: "native",
                }),
            },
        }
    }

    /// Stored paragraph vector of a Doc2Vec training document.
    pub fn document_vector(&self, id: &str) -> Option<TextEmbedding> {
        match &self.state {
            MethodState::Doc2Vec(table) => table
                .vector(id, self.dim)
                .map(|v| TextEmbedding(v.iter().map(|&x| x as f64).collect())),
            _ => None,
        }
    }

    fn known_ids(&self, tokens: &[String]) -> Result<Vec<u32>> {
        let ids: Vec<u32> = tokens.iter().filter_map(|t| self.vocab.get(t)).collect();
        if ids.is_empty() {
            return Err(Error::AllOutOfVocabulary);
        }
        Ok(ids)
    }
}
