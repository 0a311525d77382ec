//! FastText: skip-gram with negative sampling over words represented as a
//! whole-word vector plus the sum of their hashed character n-gram vectors.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sgns::{self, NoiseTable};
use super::word2vec::{context_positions, subsample, validate};
use super::{FastTextConfig, Method, MethodState, TextConfig, TextEmbeddingModel};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Hashed n-gram vectors. Buckets never touched during training are zero and
/// are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SubwordTable {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub buckets: u32,
    pub(crate) rows: BTreeMap<u32, Vec<f32>>,
}

impl SubwordTable {
    pub fn bucket_ids(&self, word: &str) -> Vec<u32> {
        char_ngrams(word, self.ngram_min, self.ngram_max)
            .iter()
            .map(|g| fnv1a(g.as_bytes()) % self.buckets)
            .collect()
    }

    /// Sum of the n-gram vectors of `word`.
    pub fn ngram_sum(&self, word: &str, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for b in self.bucket_ids(word) {
            if let Some(row) = self.rows.get(&b) {
                out.iter_mut().zip(row).for_each(|(a, &x)| *a += x as f64);
            }
        }
        out
    }

    pub fn stored_buckets(&self) -> usize {
        self.rows.len()
    }
}

/// Character n-grams of `<word>` for every length in `min..=max`.
pub fn char_ngrams(word: &str, min: usize, max: usize) -> Vec<String> {
    let chars: Vec<char> = std::iter::once('<')
        .chain(word.chars())
        .chain(std::iter::once('>'))
        .collect();
    let mut out = Vec::new();
    for n in min..=max {
        if n > chars.len() {
            break;
        }
        for start in 0..=chars.len() - n {
            out.push(chars[start..start + n].iter().collect());
        }
    }
    out
}

/// 32-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u32 {
    let mut h: u32 = 2_166_136_261;
    for &b in bytes {
        h ^= b as u32;
        h = h.wrapping_mul(16_777_619);
    }
    h
}

pub fn train(corpus: &Corpus, cfg: &FastTextConfig) -> Result<TextEmbeddingModel> {
    validate(corpus, cfg.dim, cfg.window, cfg.negatives)?;
    if cfg.ngram_min == 0 || cfg.ngram_min > cfg.ngram_max {
        return Err(Error::param("ngram range must satisfy 1 <= ngram_min <= ngram_max"));
    }
    if cfg.buckets == 0 {
        return Err(Error::param("buckets must be at least 1"));
    }
    let dim = cfg.dim;
    let v = corpus.vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut words = sgns::init_uniform(&mut rng, v * dim, 1.0 / dim as f32);
    let mut output = vec![0f32; v * dim];
    let mut ngrams: HashMap<u32, Vec<f32>> = HashMap::new();
    let noise = NoiseTable::new(corpus.vocab.counts());

    let mut table = SubwordTable {
        ngram_min: cfg.ngram_min,
        ngram_max: cfg.ngram_max,
        buckets: cfg.buckets,
        rows: BTreeMap::new(),
    };
    let subwords: Vec<Vec<u32>> = corpus.vocab.tokens().iter().map(|t| table.bucket_ids(t)).collect();

    let total = cfg.epochs * corpus.total_tokens();
    let mut processed = 0usize;
    for _ in 0..cfg.epochs {
        for doc in &corpus.docs {
            let sentence = subsample(doc, corpus, cfg.subsample_t, &mut rng);
            for pos in 0..sentence.len() {
                let lr = sgns::decayed_lr(cfg.initial_lr, processed, total) as f32;
                processed += 1;
                let center = sentence[pos] as usize;
                let buckets = &subwords[center];
                // each component moves by 1/n of the step so the summed input
                // vector moves by one full step
                let scale = -lr / (buckets.len() + 1) as f32;
                for ctx in context_positions(pos, sentence.len(), cfg.window, &mut rng) {
                    let mut hidden = words[center * dim..(center + 1) * dim].to_vec();
                    for b in buckets {
                        if let Some(row) = ngrams.get(b) {
                            hidden.iter_mut().zip(row).for_each(|(h, &x)| *h += x);
                        }
                    }
                    let targets = noise.targets(&mut rng, sentence[ctx], cfg.negatives);
                    let grad = sgns::ns_gradient(&hidden, &output, &targets);
                    sgns::update_outputs(&mut output, &hidden, &targets, &grad.coeffs, lr);
                    sgns::axpy_row(&mut words, dim, center, scale, &grad.hidden);
                    for &b in buckets {
                        let row = ngrams.entry(b).or_insert_with(|| vec![0.0; dim]);
                        row.iter_mut().zip(&grad.hidden).for_each(|(x, &g)| *x += scale * g);
                    }
                }
            }
            processed += doc.len() - sentence.len();
        }
    }
    table.rows = ngrams.into_iter().collect();

    Ok(TextEmbeddingModel {
        method: Method::FastText,
        dim,
        vocab: corpus.vocab.clone(),
        vectors: words,
        state: MethodState::FastText(table),
        config: TextConfig::Fasttext(cfg.clone()),
    })
}
