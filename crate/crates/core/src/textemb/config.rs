use serde::{Deserialize, Serialize};

use super::{doc2vec, fasttext, glove, lda, word2vec, Method, TextEmbeddingModel};
use crate::corpus::Corpus;
use crate::error::Result;

pub const DEFAULT_DIM: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Word2VecConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    /// Frequent-word subsampling threshold; disabled when `None`.
    pub subsample_t: Option<f64>,
    pub seed: u64,
}

impl Default for Word2VecConfig {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            window: 5,
            negatives: 5,
            epochs: 15,
            initial_lr: 0.025,
            subsample_t: None,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GloveConfig {
    pub dim: usize,
    pub window: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub epochs: usize,
    pub initial_lr: f64,
    pub seed: u64,
}

impl Default for GloveConfig {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            window: 5,
            x_max: 100.0,
            alpha: 0.75,
            epochs: 15,
            initial_lr: 0.05,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    pub topics: usize,
    /// Document-topic prior; `50 / topics` when unset.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub gibbs_iters: usize,
    pub burn_in: usize,
    /// Gibbs sweeps used to fold in an unseen document.
    pub fold_in_iters: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            topics: DEFAULT_DIM,
            alpha: None,
            beta: 0.01,
            gibbs_iters: 500,
            burn_in: 200,
            fold_in_iters: 50,
            seed: 1,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FastTextConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub buckets: u32,
    pub epochs: usize,
    pub initial_lr: f64,
    pub subsample_t: Option<f64>,
    pub seed: u64,
}

impl Default for FastTextConfig {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            window: 5,
            negatives: 5,
            ngram_min: 3,
            ngram_max: 6,
            buckets: 1 << 20,
            epochs: 15,
            initial_lr: 0.025,
            subsample_t: None,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Doc2VecConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub infer_steps: usize,
    pub seed: u64,
}

impl Default for Doc2VecConfig {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            window: 5,
            negatives: 5,
            epochs: 15,
            initial_lr: 0.025,
            infer_steps: 50,
            seed: 1,
        }
    }
}

/// Training configuration of any of the five methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum TextConfig {
    Word2vec(Word2VecConfig),
    Glove(GloveConfig),
    Lda(LdaConfig),
    Doc2vec(Doc2VecConfig),
    Fasttext(FastTextConfig),
}

impl TextConfig {
    pub fn method(&self) -> Method {
        match self {
            TextConfig::Word2vec(_) => Method::Word2Vec,
            TextConfig::Glove(_) => Method::Glove,
            TextConfig::Lda(_) => Method::Lda,
            TextConfig::Doc2vec(_) => Method::Doc2Vec,
            TextConfig::Fasttext(_) => Method::FastText,
        }
    }

    /// Default configuration of `method` with dimension `dim` and `seed`.
    pub fn with_defaults(method: Method, dim: usize, seed: u64) -> Self {
        match method {
            Method::Word2Vec => TextConfig::Word2vec(Word2VecConfig {
                dim,
                seed,
                ..Default::default()
            }),
            Method::Glove => TextConfig::Glove(GloveConfig {
                dim,
                seed,
                ..Default::default()
            }),
            Method::Lda => TextConfig::Lda(LdaConfig {
                topics: dim,
                seed,
                ..Default::default()
            }),
            Method::Doc2Vec => TextConfig::Doc2vec(Doc2VecConfig {
                dim,
                seed,
                ..Default::default()
            }),
            Method::FastText => TextConfig::Fasttext(FastTextConfig {
                dim,
                seed,
                ..Default::default()
            }),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TextConfig::Word2vec(c) => c.dim,
            TextConfig::Glove(c) => c.dim,
            TextConfig::Lda(c) => c.topics,
            TextConfig::Doc2vec(c) => c.dim,
            TextConfig::Fasttext(c) => c.dim,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            TextConfig::Word2vec(c) => c.seed,
            TextConfig::Glove(c) => c.seed,
            TextConfig::Lda(c) => c.seed,
            TextConfig::Doc2vec(c) => c.seed,
            TextConfig::Fasttext(c) => c.seed,
        }
    }

    pub fn set_dim(&mut self, dim: usize) {
        match self {
            TextConfig::Word2vec(c) => c.dim = dim,
            TextConfig::Glove(c) => c.dim = dim,
            TextConfig::Lda(c) => c.topics = dim,
            TextConfig::Doc2vec(c) => c.dim = dim,
            TextConfig::Fasttext(c) => c.dim = dim,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            TextConfig::Word2vec(c) => c.seed = seed,
            TextConfig::Glove(c) => c.seed = seed,
            TextConfig::Lda(c) => c.seed = seed,
            TextConfig::Doc2vec(c) => c.seed = seed,
            TextConfig::Fasttext(c) => c.seed = seed,
        }
    }

    pub fn train(&self, corpus: &Corpus) -> Result<TextEmbeddingModel> {
        match self {
            TextConfig::Word2vec(c) => word2vec::train(corpus, c),
            TextConfig::Glove(c) => glove::train(corpus, c),
            TextConfig::Lda(c) => lda::train(corpus, c),
            TextConfig::Doc2vec(c) => doc2vec::train(corpus, c),
            TextConfig::Fasttext(c) => fasttext::train(corpus, c),
        }
    }
}
