use std::collections::HashMap;

use super::TextEmbeddingModel;
use crate::corpus::{generate_synthetic, Corpus, SyntheticConfig};

/// Corpus from the two-concept generator plus the owning concept of each word.
pub fn two_concept_corpus(docs_per_concept: usize) -> (Corpus, HashMap<String, usize>) {
    let ds = generate_synthetic(&SyntheticConfig::new(2, docs_per_concept, 4, 0.1, 5)).unwrap();
    let mut owner = HashMap::new();
    for (i, d) in ds.documents.iter().enumerate() {
        for t in &d.tokens {
            owner.insert(t.clone(), i % 2);
        }
    }
    (Corpus::from_dataset(&ds, 1).unwrap(), owner)
}

/// Mean cosine over same-concept word pairs and over cross-concept pairs.
pub fn intra_inter_cosine(model: &TextEmbeddingModel, owner: &HashMap<String, usize>) -> (f64, f64) {
    let words: Vec<(&String, Vec<f64>)> = owner
        .keys()
        .map(|w| (w, model.embed_word(w).unwrap().into_inner()))
        .collect();
    let (mut intra, mut n_intra, mut inter, mut n_inter) = (0.0, 0, 0.0, 0);
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let c = cosine(&words[i].1, &words[j].1);
            if owner[words[i].0] == owner[words[j].0] {
                intra += c;
                n_intra += 1;
            } else {
                inter += c;
                n_inter += 1;
            }
        }
    }
    (intra / n_intra as f64, inter / n_inter as f64)
}

/// Cosine similarity of two f64 slices, zero if either is null.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
