//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! A word embeds as its smoothed topic posterior `P(topic | word)`; a
//! document embeds natively by folding it in against the frozen topic-word
//! statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LdaConfig, Method, MethodState, TextConfig, TextEmbeddingModel};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LdaState {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `topics x |V|` topic-word counts averaged over post-burn-in sweeps.
    pub topic_word: Vec<f64>,
}

impl LdaState {
    /// Topic distribution of a document with topic-word statistics frozen.
    pub fn fold_in(&self, doc: &[u32], vocab_len: usize, cfg: &LdaConfig) -> Vec<f64> {
        let k = self.topics;
        let totals: Vec<f64> = (0..k)
            .map(|t| self.topic_word[t * vocab_len..(t + 1) * vocab_len].iter().sum::<f64>())
            .collect();
        let vbeta = vocab_len as f64 * self.beta;
        let phi = |t: usize, w: u32| (self.topic_word[t * vocab_len + w as usize] + self.beta) / (totals[t] + vbeta);

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x00f0_1d1a);
        let mut z: Vec<usize> = doc.iter().map(|_| rng.random_range(0..k)).collect();
        let mut n_dk = vec![0f64; k];
        z.iter().for_each(|&t| n_dk[t] += 1.0);
        let mut probs = vec![0f64; k];
        let iters = cfg.fold_in_iters.max(1);
        let burn = iters / 2;
        let mut acc = vec![0f64; k];
        for it in 0..iters {
            for (i, &w) in doc.iter().enumerate() {
                n_dk[z[i]] -= 1.0;
                for t in 0..k {
                    probs[t] = phi(t, w) * (n_dk[t] + self.alpha);
                }
                z[i] = sample_discrete(&probs, &mut rng);
                n_dk[z[i]] += 1.0;
            }
            if it >= burn {
                acc.iter_mut().zip(&n_dk).for_each(|(a, &n)| *a += n);
            }
        }
        let samples = (iters - burn) as f64;
        let denom = doc.len() as f64 + k as f64 * self.alpha;
        acc.iter().map(|&a| (a / samples + self.alpha) / denom).collect()
    }
}

fn sample_discrete<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

/// Token-topic assignments after the final sweep, for inspection in tests.
pub fn train_with_assignments(corpus: &Corpus, cfg: &LdaConfig) -> Result<(TextEmbeddingModel, Vec<Vec<usize>>)> {
    if corpus.total_tokens() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let k = cfg.topics;
    if k < 2 {
        return Err(Error::param("LDA needs at least 2 topics"));
    }
    if cfg.burn_in >= cfg.gibbs_iters {
        return Err(Error::param("burn_in must be smaller than gibbs_iters"));
    }
    let alpha = cfg.alpha();
    let beta = cfg.beta;
    let v = corpus.vocab.len();
    let vbeta = v as f64 * beta;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut n_wk = vec![0u32; v * k];
    let mut n_k = vec![0u32; k];
    let mut n_dk: Vec<Vec<u32>> = vec![vec![0; k]; corpus.docs.len()];
    let mut z: Vec<Vec<usize>> = corpus
        .docs
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            doc.iter()
                .map(|&w| {
                    let t = rng.random_range(0..k);
                    n_wk[w as usize * k + t] += 1;
                    n_k[t] += 1;
                    n_dk[d][t] += 1;
                    t
                })
                .collect()
        })
        .collect();

    let mut acc = vec![0f64; v * k];
    let mut probs = vec![0f64; k];
    for it in 0..cfg.gibbs_iters {
        for (d, doc) in corpus.docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let w = w as usize;
                let old = z[d][i];
                n_wk[w * k + old] -= 1;
                n_k[old] -= 1;
                n_dk[d][old] -= 1;
                for t in 0..k {
                    probs[t] = (n_wk[w * k + t] as f64 + beta) / (n_k[t] as f64 + vbeta) * (n_dk[d][t] as f64 + alpha);
                }
                let new = sample_discrete(&probs, &mut rng);
                z[d][i] = new;
                n_wk[w * k + new] += 1;
                n_k[new] += 1;
                n_dk[d][new] += 1;
            }
        }
        if it >= cfg.burn_in {
            acc.iter_mut().zip(&n_wk).for_each(|(a, &n)| *a += n as f64);
        }
    }
    let samples = (cfg.gibbs_iters - cfg.burn_in) as f64;
    acc.iter_mut().for_each(|a| *a /= samples);

    let mut vectors = vec![0f32; v * k];
    let mut topic_word = vec![0f64; k * v];
    for w in 0..v {
        let row = &acc[w * k..(w + 1) * k];
        let total: f64 = row.iter().map(|&c| c + beta).sum();
        for t in 0..k {
            vectors[w * k + t] = ((row[t] + beta) / total) as f32;
            topic_word[t * v + w] = row[t];
        }
    }

    let model = TextEmbeddingModel {
        method: Method::Lda,
        dim: k,
        vocab: corpus.vocab.clone(),
        vectors,
        state: MethodState::Lda(LdaState {
            topics: k,
            alpha,
            beta,
            topic_word,
        }),
        config: TextConfig::Lda(cfg.clone()),
    };
    Ok((model, z))
}

pub fn train(corpus: &Corpus, cfg: &LdaConfig) -> Result<TextEmbeddingModel> {
    train_with_assignments(corpus, cfg).map(|(m, _)| m)
}
