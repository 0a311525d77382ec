//! Word2Vec, continuous bag-of-words with negative sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sgns::{self, NoiseTable};
use super::{Method, MethodState, TextConfig, TextEmbeddingModel, Word2VecConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub fn train(corpus: &Corpus, cfg: &Word2VecConfig) -> Result<TextEmbeddingModel> {
    validate(corpus, cfg.dim, cfg.window, cfg.negatives)?;
    let dim = cfg.dim;
    let v = corpus.vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut input = sgns::init_uniform(&mut rng, v * dim, 0.5 / dim as f32);
    let mut output = vec![0f32; v * dim];
    let noise = NoiseTable::new(corpus.vocab.counts());

    let total = cfg.epochs * corpus.total_tokens();
    let mut processed = 0usize;
    for _ in 0..cfg.epochs {
        for doc in &corpus.docs {
            let sentence = subsample(doc, corpus, cfg.subsample_t, &mut rng);
            for pos in 0..sentence.len() {
                let lr = sgns::decayed_lr(cfg.initial_lr, processed, total) as f32;
                processed += 1;
                let context = context_positions(pos, sentence.len(), cfg.window, &mut rng);
                if context.is_empty() {
                    continue;
                }
                let rows: Vec<usize> = context.iter().map(|&p| sentence[p] as usize).collect();
                let hidden = sgns::mean_rows(&input, dim, rows.iter().copied());
                let targets = noise.targets(&mut rng, sentence[pos], cfg.negatives);
                let grad = sgns::ns_gradient(&hidden, &output, &targets);
                sgns::update_outputs(&mut output, &hidden, &targets, &grad.coeffs, lr);
                let scale = -lr / rows.len() as f32;
                for &r in &rows {
                    sgns::axpy_row(&mut input, dim, r, scale, &grad.hidden);
                }
            }
            processed += doc.len() - sentence.len();
        }
    }

    Ok(TextEmbeddingModel {
        method: Method::Word2Vec,
        dim,
        vocab: corpus.vocab.clone(),
        vectors: input,
        state: MethodState::Plain,
        config: TextConfig::Word2vec(cfg.clone()),
    })
}

pub(crate) fn validate(corpus: &Corpus, dim: usize, window: usize, negatives: usize) -> Result<()> {
    if corpus.total_tokens() == 0 || corpus.vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if dim == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    if window == 0 {
        return Err(Error::param("window must be at least 1"));
    }
    if negatives == 0 {
        return Err(Error::param("negatives must be at least 1"));
    }
    Ok(())
}

/// Positions around `pos` inside a window shrunk by a random amount.
pub(crate) fn context_positions<R: Rng>(pos: usize, len: usize, window: usize, rng: &mut R) -> Vec<usize> {
    let reach = window - rng.random_range(0..window);
    let lo = pos.saturating_sub(reach);
    let hi = (pos + reach).min(len - 1);
    (lo..=hi).filter(|&p| p != pos).collect()
}

pub(crate) fn subsample<R: Rng>(doc: &[u32], corpus: &Corpus, threshold: Option<f64>, rng: &mut R) -> Vec<u32> {
    let Some(t) = threshold else {
        return doc.to_vec();
    };
    let total: u64 = corpus.vocab.counts().iter().sum();
    doc.iter()
        .copied()
        .filter(|&w| {
            let keep = sgns::keep_probability(corpus.vocab.count(w), total, t);
            keep >= 1.0 || rng.random::<f64>() < keep
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textemb::testutil::{intra_inter_cosine, two_concept_corpus};

    fn cfg() -> Word2VecConfig {
        Word2VecConfig {
            dim: 16,
            epochs: 5,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let (corpus, _) = two_concept_corpus(40);
        let a = train(&corpus, &cfg()).unwrap();
        let b = train(&corpus, &cfg()).unwrap();
        assert_eq!(a.vectors, b.vectors);
        let c = train(&corpus, &Word2VecConfig { seed: 12, ..cfg() }).unwrap();
        assert_ne!(a.vectors, c.vectors);
    }

    #[test]
    fn shapes_are_finite() {
        let (corpus, _) = two_concept_corpus(40);
        let m = train(&corpus, &cfg()).unwrap();
        for tok in corpus.vocab.tokens() {
            let v = m.embed_word(tok).unwrap();
            assert_eq!(v.len(), 16);
            assert!(v.iter().all(|x| x.is_finite()));
        }
        assert!(m.embed_word("definitely-not-here").is_err());
    }

    #[test]
    fn separates_concepts() {
        let (corpus, owner) = two_concept_corpus(200);
        let m = train(&corpus, &Word2VecConfig { dim: 32, ..cfg() }).unwrap();
        let (intra, inter) = intra_inter_cosine(&m, &owner);
        assert!(intra > inter, "intra {intra} <= inter {inter}");
    }

    #[test]
    fn subsampling_is_optional_and_seeded() {
        let (corpus, _) = two_concept_corpus(40);
        let c = Word2VecConfig {
            subsample_t: Some(1e-2),
            ..cfg()
        };
        assert_eq!(train(&corpus, &c).unwrap().vectors, train(&corpus, &c).unwrap().vectors);
    }

    #[test]
    fn rejects_bad_config() {
        let (corpus, _) = two_concept_corpus(5);
        assert!(train(&corpus, &Word2VecConfig { window: 0, ..cfg() }).is_err());
        assert!(train(&corpus, &Word2VecConfig { negatives: 0, ..cfg() }).is_err());
    }
}
