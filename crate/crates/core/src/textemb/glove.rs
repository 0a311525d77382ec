//! GloVe: weighted least squares on log co-occurrence counts, optimised with
//! AdaGrad.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sgns;
use super::{GloveConfig, Method, MethodState, TextConfig, TextEmbeddingModel};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::parallel;

/// Documents counted per work unit; fixed so the summation order, and hence
/// the result, does not depend on the number of threads.
const COUNT_CHUNK: usize = 256;

/// Sparse symmetric co-occurrence matrix, entries sorted by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cooccurrence {
    pub entries: Vec<(u32, u32, f64)>,
}

impl Cooccurrence {
    pub fn get(&self, i: u32, j: u32) -> f64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(i, j)))
            .map_or(0.0, |k| self.entries[k].2)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Symmetric windowed counts where a pair at distance `d` adds `1/d`.
pub fn cooccurrence(docs: &[Vec<u32>], window: usize) -> Cooccurrence {
    let chunks: Vec<&[Vec<u32>]> = docs.chunks(COUNT_CHUNK).collect();
    let partial = parallel::map(&chunks, |chunk| {
        let mut counts: HashMap<(u32, u32), f64> = HashMap::new();
        for doc in chunk.iter() {
            for (i, &a) in doc.iter().enumerate() {
                for d in 1..=window {
                    let Some(&b) = doc.get(i + d) else { break };
                    let w = 1.0 / d as f64;
                    *counts.entry((a, b)).or_insert(0.0) += w;
                    *counts.entry((b, a)).or_insert(0.0) += w;
                }
            }
        }
        let mut sorted: Vec<((u32, u32), f64)> = counts.into_iter().collect();
        sorted.sort_unstable_by_key(|e| e.0);
        sorted
    });
    let mut merged: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for chunk in partial {
        for (k, v) in chunk {
            *merged.entry(k).or_insert(0.0) += v;
        }
    }
    Cooccurrence {
        entries: merged.into_iter().map(|((i, j), x)| (i, j, x)).collect(),
    }
}

/// GloVe parameters during training.
#[derive(Debug, Clone)]
pub struct GloveParams {
    pub dim: usize,
    pub w: Vec<f64>,
    pub w_ctx: Vec<f64>,
    pub b: Vec<f64>,
    pub b_ctx: Vec<f64>,
}

fn weight(x: f64, x_max: f64, alpha: f64) -> f64 {
    if x < x_max {
        (x / x_max).powf(alpha)
    } else {
        1.0
    }
}

/// `sum f(X_ij) (w_i . w~_j + b_i + b~_j - ln X_ij)^2` over stored entries.
pub fn objective(p: &GloveParams, x: &Cooccurrence, x_max: f64, alpha: f64) -> f64 {
    let d = p.dim;
    x.entries
        .iter()
        .map(|&(i, j, xij)| {
            let (i, j) = (i as usize, j as usize);
            let dot: f64 = p.w[i * d..(i + 1) * d]
                .iter()
                .zip(&p.w_ctx[j * d..(j + 1) * d])
                .map(|(a, b)| a * b)
                .sum();
            let diff = dot + p.b[i] + p.b_ctx[j] - xij.ln();
            weight(xij, x_max, alpha) * diff * diff
        })
        .sum()
}

/// Trains GloVe, returning the model and the objective before training and
/// after each epoch.
pub fn train_with_history(corpus: &Corpus, cfg: &GloveConfig) -> Result<(TextEmbeddingModel, Vec<f64>)> {
    if corpus.total_tokens() == 0 {
        return Err(Error::EmptyCorpus);
    }
    if cfg.dim == 0 || cfg.window == 0 {
        return Err(Error::param("dimension and window must be positive"));
    }
    let x = cooccurrence(&corpus.docs, cfg.window);
    if x.is_empty() {
        return Err(Error::Evaluation("co-occurrence matrix is empty".into()));
    }
    let d = cfg.dim;
    let v = corpus.vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 / d as f32;
    let to64 = |v: Vec<f32>| v.into_iter().map(f64::from).collect::<Vec<f64>>();
    let mut p = GloveParams {
        dim: d,
        w: to64(sgns::init_uniform(&mut rng, v * d, half)),
        w_ctx: to64(sgns::init_uniform(&mut rng, v * d, half)),
        b: to64(sgns::init_uniform(&mut rng, v, half)),
        b_ctx: to64(sgns::init_uniform(&mut rng, v, half)),
    };
    let mut g_w = vec![1.0f64; v * d];
    let mut g_wc = vec![1.0f64; v * d];
    let mut g_b = vec![1.0f64; v];
    let mut g_bc = vec![1.0f64; v];

    let mut history = vec![objective(&p, &x, cfg.x_max, cfg.alpha)];
    let mut order: Vec<usize> = (0..x.len()).collect();
    let lr = cfg.initial_lr;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let (i, j, xij) = x.entries[k];
            let (i, j) = (i as usize, j as usize);
            let (wi, wj) = (i * d, j * d);
            let dot: f64 = (0..d).map(|t| p.w[wi + t] * p.w_ctx[wj + t]).sum();
            let diff = dot + p.b[i] + p.b_ctx[j] - xij.ln();
            let fdiff = weight(xij, cfg.x_max, cfg.alpha) * diff;
            for t in 0..d {
                let gi = fdiff * p.w_ctx[wj + t];
                let gj = fdiff * p.w[wi + t];
                p.w[wi + t] -= lr * gi / g_w[wi + t].sqrt();
                p.w_ctx[wj + t] -= lr * gj / g_wc[wj + t].sqrt();
                g_w[wi + t] += gi * gi;
                g_wc[wj + t] += gj * gj;
            }
            p.b[i] -= lr * fdiff / g_b[i].sqrt();
            p.b_ctx[j] -= lr * fdiff / g_bc[j].sqrt();
            g_b[i] += fdiff * fdiff;
            g_bc[j] += fdiff * fdiff;
        }
        history.push(objective(&p, &x, cfg.x_max, cfg.alpha));
    }

    let vectors = p.w.iter().zip(&p.w_ctx).map(|(a, b)| (a + b) as f32).collect();
    let model = TextEmbeddingModel {
        method: Method::Glove,
        dim: d,
        vocab: corpus.vocab.clone(),
        vectors,
        state: MethodState::Plain,
        config: TextConfig::Glove(cfg.clone()),
    };
    Ok((model, history))
}

pub fn train(corpus: &Corpus, cfg: &GloveConfig) -> Result<TextEmbeddingModel> {
    train_with_history(corpus, cfg).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textemb::testutil::{intra_inter_cosine, two_concept_corpus};

    fn cfg() -> GloveConfig {
        GloveConfig {
            dim: 16,
            epochs: 10,
            seed: 2,
            ..Default::default()
        }
    }

    #[test]
    fn alternating_pair_counts() {
        // "a b a b a b": five adjacent pairs at distance 1
        let x = cooccurrence(&[vec![0, 1, 0, 1, 0, 1]], 1);
        assert_eq!(x.get(0, 1), 5.0);
        assert_eq!(x.get(1, 0), 5.0);
        assert_eq!(x.get(0, 0), 0.0);
    }

    #[test]
    fn distance_weighting() {
        let x = cooccurrence(&[vec![0, 1, 2]], 2);
        assert_eq!(x.get(0, 1), 1.0);
        assert_eq!(x.get(0, 2), 0.5);
        assert_eq!(x.get(2, 0), 0.5);
    }

    #[test]
    fn matrix_is_symmetric_and_chunking_invariant() {
        let (corpus, _) = two_concept_corpus(400);
        let x = cooccurrence(&corpus.docs, 5);
        for &(i, j, v) in &x.entries {
            assert_eq!(x.get(j, i), v);
        }
        // one large sequential pass gives the same sums up to rounding
        let mut flat: HashMap<(u32, u32), f64> = HashMap::new();
        for doc in &corpus.docs {
            for (i, &a) in doc.iter().enumerate() {
                for d in 1..=5 {
                    if let Some(&b) = doc.get(i + d) {
                        *flat.entry((a, b)).or_default() += 1.0 / d as f64;
                        *flat.entry((b, a)).or_default() += 1.0 / d as f64;
                    }
                }
            }
        }
        assert_eq!(flat.len(), x.len());
        for &(i, j, v) in &x.entries {
            assert!((flat[&(i, j)] - v).abs() < 1e-9);
        }
    }

    #[test]
    fn objective_drops_after_first_epoch() {
        let (corpus, _) = two_concept_corpus(100);
        let (_, hist) = train_with_history(&corpus, &cfg()).unwrap();
        assert!(hist[1] < hist[0], "{hist:?}");
        assert!(hist.last().unwrap() < &hist[0]);
    }

    #[test]
    fn separates_concepts() {
        let (corpus, owner) = two_concept_corpus(200);
        let m = train(
            &corpus,
            &GloveConfig {
                dim: 32,
                epochs: 25,
                ..cfg()
            },
        )
        .unwrap();
        let (intra, inter) = intra_inter_cosine(&m, &owner);
        assert!(intra > inter, "intra {intra} <= inter {inter}");
    }

    #[test]
    fn deterministic_per_seed() {
        let (corpus, _) = two_concept_corpus(30);
        assert_eq!(train(&corpus, &cfg()).unwrap(), train(&corpus, &cfg()).unwrap());
    }
}
