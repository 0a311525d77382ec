//! Doc2Vec in its distributed-memory form (PV-DM): a paragraph vector is
//! averaged with the context word vectors to predict the centre word.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sgns::{self, NoiseTable};
use super::word2vec::{context_positions, validate};
use super::{Doc2VecConfig, Method, MethodState, TextConfig, TextEmbeddingModel};
use crate::corpus::Corpus;
use crate::error::Result;

/// Paragraph vectors of the training documents plus the frozen output layer
/// needed to infer vectors for unseen documents.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTable {
    pub(crate) ids: Vec<String>,
    pub(crate) vectors: Vec<f32>,
    pub(crate) outputs: Vec<f32>,
    pub(crate) index: HashMap<String, usize>,
}

impl DocTable {
    pub(crate) fn new(ids: Vec<String>, vectors: Vec<f32>, outputs: Vec<f32>) -> Self {
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Self {
            ids,
            vectors,
            outputs,
            index,
        }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vector(&self, id: &str, dim: usize) -> Option<&[f32]> {
        self.index.get(id).map(|&i| &self.vectors[i * dim..(i + 1) * dim])
    }
}

pub fn train(corpus: &Corpus, cfg: &Doc2VecConfig) -> Result<TextEmbeddingModel> {
    validate(corpus, cfg.dim, cfg.window, cfg.negatives)?;
    let dim = cfg.dim;
    let v = corpus.vocab.len();
    let n_docs = corpus.docs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 / dim as f32;
    let mut words = sgns::init_uniform(&mut rng, v * dim, half);
    let mut docs = sgns::init_uniform(&mut rng, n_docs * dim, half);
    let mut output = vec![0f32; v * dim];
    let noise = NoiseTable::new(corpus.vocab.counts());

    let total = cfg.epochs * corpus.total_tokens();
    let mut processed = 0usize;
    for _ in 0..cfg.epochs {
        for (d, doc) in corpus.docs.iter().enumerate() {
            for pos in 0..doc.len() {
                let lr = sgns::decayed_lr(cfg.initial_lr, processed, total) as f32;
                processed += 1;
                let context = context_positions(pos, doc.len(), cfg.window, &mut rng);
                let n_in = context.len() + 1;
                let mut hidden = sgns::mean_rows(&words, dim, context.iter().map(|&p| doc[p] as usize));
                let doc_row = &docs[d * dim..(d + 1) * dim];
                for (h, &x) in hidden.iter_mut().zip(doc_row) {
                    *h = (*h * context.len() as f32 + x) / n_in as f32;
                }
                let targets = noise.targets(&mut rng, doc[pos], cfg.negatives);
                let grad = sgns::ns_gradient(&hidden, &output, &targets);
                sgns::update_outputs(&mut output, &hidden, &targets, &grad.coeffs, lr);
                let scale = -lr / n_in as f32;
                sgns::axpy_row(&mut docs, dim, d, scale, &grad.hidden);
                for &p in &context {
                    sgns::axpy_row(&mut words, dim, doc[p] as usize, scale, &grad.hidden);
                }
            }
        }
    }

    Ok(TextEmbeddingModel {
        method: Method::Doc2Vec,
        dim,
        vocab: corpus.vocab.clone(),
        vectors: words,
        state: MethodState::Doc2Vec(DocTable::new(corpus.doc_ids.clone(), docs, output)),
        config: TextConfig::Doc2vec(cfg.clone()),
    })
}

/// Infers a paragraph vector for `doc` with word and output weights frozen.
pub(crate) fn infer(model: &TextEmbeddingModel, table: &DocTable, doc: &[u32], cfg: &Doc2VecConfig) -> Vec<f64> {
    let dim = model.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_d0c5);
    let mut vector = sgns::init_uniform(&mut rng, dim, 0.5 / dim as f32);
    let noise = NoiseTable::new(model.vocab.counts());
    let total = cfg.infer_steps * doc.len();
    let mut processed = 0usize;
    for _ in 0..cfg.infer_steps {
        for pos in 0..doc.len() {
            let lr = sgns::decayed_lr(cfg.initial_lr, processed, total) as f32;
            processed += 1;
            let context = context_positions(pos, doc.len(), cfg.window, &mut rng);
            let n_in = context.len() + 1;
            let mut hidden = sgns::mean_rows(&model.vectors, dim, context.iter().map(|&p| doc[p] as usize));
            for (h, &x) in hidden.iter_mut().zip(&vector) {
                *h = (*h * context.len() as f32 + x) / n_in as f32;
            }
            let targets = noise.targets(&mut rng, doc[pos], cfg.negatives);
            let grad = sgns::ns_gradient(&hidden, &table.outputs, &targets);
            let scale = -lr / n_in as f32;
            for (x, &g) in vector.iter_mut().zip(&grad.hidden) {
                *x += scale * g;
            }
        }
    }
    vector.into_iter().map(f64::from).collect()
}
