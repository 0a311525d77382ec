use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{Document, PairDataset};
use crate::error::{Error, Result};

const SYLLABLES_C: &[u8] = b"bdfgklmnprstvz";
const SYLLABLES_V: &[u8] = b"aeiou";

/// Parameters of the synthetic concept generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub num_concepts: usize,
    pub docs_per_concept: usize,
    pub feature_dim: usize,
    pub noise_sigma: f64,
    /// Words owned by each concept, including the concept name itself.
    pub words_per_concept: usize,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(num_concepts: usize, docs_per_concept: usize, feature_dim: usize, noise_sigma: f64, seed: u64) -> Self {
        Self {
            num_concepts,
            docs_per_concept,
            feature_dim,
            noise_sigma,
            words_per_concept: 8,
            seed,
        }
    }
}

/// Name of concept `k`, used both as its tag and as one of its words.
pub fn concept_name(k: usize) -> String {
    format!("concept{k}")
}

/// Generates `K * M` image-caption pairs from `K` latent concepts.
///
/// Each concept owns a disjoint vocabulary (its name plus random pseudo-words).
/// A caption draws 3 to 8 words from its concept vocabulary with replacement.
/// Its image feature is a fixed random projection of the concept one-hot plus
/// isotropic Gaussian noise with standard deviation `noise_sigma`. Documents
/// are interleaved by concept and tagged with the concept name.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<PairDataset> {
    let k = cfg.num_concepts;
    if k < 2 {
        return Err(Error::param("synthetic data needs at least 2 concepts"));
    }
    if cfg.docs_per_concept < 1 {
        return Err(Error::param("docs_per_concept must be positive"));
    }
    if cfg.feature_dim < k {
        return Err(Error::param(format!(
            "feature_dim ({}) must be at least the number of concepts ({k})",
            cfg.feature_dim
        )));
    }
    if cfg.words_per_concept < 5 {
        return Err(Error::param("each concept needs at least 5 words"));
    }
    if !(cfg.noise_sigma >= 0.0 && cfg.noise_sigma.is_finite()) {
        return Err(Error::param("noise_sigma must be finite and non-negative"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut used = HashSet::new();
    let vocabularies: Vec<Vec<String>> = (0..k)
        .map(|c| {
            let mut words = vec![concept_name(c)];
            while words.len() < cfg.words_per_concept {
                let w = pseudo_word(&mut rng);
                if used.insert(w.clone()) {
                    words.push(w);
                }
            }
            words
        })
        .collect();

    // column c of the projection is the clean image of concept c
    let projection: Vec<Vec<f32>> = (0..k)
        .map(|_| (0..cfg.feature_dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let noise = Normal::new(0.0, cfg.noise_sigma).expect("validated sigma");

    let n = k * cfg.docs_per_concept;
    let mut docs = Vec::with_capacity(n);
    let mut feats = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        let len = rng.random_range(3..=8);
        let words: Vec<&str> = (0..len)
            .map(|_| vocabularies[c][rng.random_range(0..cfg.words_per_concept)].as_str())
            .collect();
        docs.push(Document::new(format!("s{i:06}"), words.join(" ")).with_tags([concept_name(c)]));
        let feat: Vec<f32> = projection[c]
            .iter()
            .map(|&x| {
                if cfg.noise_sigma > 0.0 {
                    x + noise.sample(&mut rng) as f32
                } else {
                    x
                }
            })
            .collect();
        feats.push(feat);
    }
    PairDataset::new(docs, feats)
}

fn pseudo_word<R: Rng>(rng: &mut R) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push(SYLLABLES_C[rng.random_range(0..SYLLABLES_C.len())] as char);
        w.push(SYLLABLES_V[rng.random_range(0..SYLLABLES_V.len())] as char);
    }
    w
}
