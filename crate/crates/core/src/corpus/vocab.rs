use std::collections::HashMap;

use crate::error::{Error, Result};

/// Minimum corpus frequency for a token to enter the vocabulary by default.
pub const DEFAULT_MIN_COUNT: u64 = 20;

/// Token statistics over a caption corpus.
///
/// Indices are dense in `0..len()` and assigned by descending corpus
/// frequency, ties broken lexicographically, so the assignment does not
/// depend on document order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    doc_freqs: Vec<u64>,
    n_docs: u64,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Counts tokens over `docs` and keeps those seen at least `min_count` times.
    pub fn build<'a, I, D>(docs: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = D>,
        D: AsRef<[String]> + 'a,
    {
        let mut stats: HashMap<&str, (u64, u64)> = HashMap::new();
        let mut owned: Vec<D> = Vec::new();
        for doc in docs {
            owned.push(doc);
        }
        if owned.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        for doc in &owned {
            let doc = doc.as_ref();
            let mut seen: Vec<&str> = Vec::with_capacity(doc.len());
            for tok in doc {
                stats.entry(tok.as_str()).or_default().0 += 1;
                seen.push(tok.as_str());
            }
            seen.sort_unstable();
            seen.dedup();
            for tok in seen {
                stats.get_mut(tok).expect("counted above").1 += 1;
            }
        }

        let mut kept: Vec<(&str, u64, u64)> = stats
            .into_iter()
            .filter(|&(_, (count, _))| count >= min_count)
            .map(|(tok, (count, df))| (tok, count, df))
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        Ok(Self::from_parts(
            kept.iter().map(|k| k.0.to_owned()).collect(),
            kept.iter().map(|k| k.1).collect(),
            kept.iter().map(|k| k.2).collect(),
            owned.len() as u64,
        ))
    }

    /// Reassembles a vocabulary from stored columns (used by the model reader).
    pub fn from_parts(tokens: Vec<String>, counts: Vec<u64>, doc_freqs: Vec<u64>, n_docs: u64) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Self {
            tokens,
            counts,
            doc_freqs,
            n_docs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, idx: u32) -> &str {
        &self.tokens[idx as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn count(&self, idx: u32) -> u64 {
        self.counts[idx as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn doc_freq(&self, idx: u32) -> u64 {
        self.doc_freqs[idx as usize]
    }

    pub fn doc_freqs(&self) -> &[u64] {
        &self.doc_freqs
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf_for_df(&self, df: u64) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
    }

    pub fn idf(&self, idx: u32) -> f64 {
        self.idf_for_df(self.doc_freq(idx))
    }
}

/// Normalized tf-idf weight of every distinct in-vocabulary token of `doc`,
/// in first-occurrence order. Out-of-vocabulary tokens are omitted (their
/// weight is zero). The weights sum to one.
pub fn tfidf_weights(doc: &[String], vocab: &Vocabulary) -> Result<Vec<(String, f64)>> {
    weighted_terms(doc, vocab, false)
}

/// Like [`tfidf_weights`] but, when `keep_oov` is set, out-of-vocabulary
/// tokens participate with document frequency zero.
pub(crate) fn weighted_terms(doc: &[String], vocab: &Vocabulary, keep_oov: bool) -> Result<Vec<(String, f64)>> {
    let mut order: Vec<&str> = Vec::new();
    let mut tf: HashMap<&str, u64> = HashMap::new();
    for tok in doc {
        if !keep_oov && vocab.get(tok).is_none() {
            continue;
        }
        let e = tf.entry(tok.as_str()).or_insert(0);
        if *e == 0 {
            order.push(tok.as_str());
        }
        *e += 1;
    }
    if order.is_empty() {
        return Err(Error::AllOutOfVocabulary);
    }
    let raw: Vec<f64> = order
        .iter()
        .map(|tok| {
            let df = vocab.get(tok).map_or(0, |i| vocab.doc_freq(i));
            tf[tok] as f64 * vocab.idf_for_df(df)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(order
        .into_iter()
        .zip(raw)
        .map(|(tok, w)| (tok.to_owned(), w / total))
        .collect())
}

/// A tokenized corpus mapped onto its vocabulary, ready for training.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub vocab: Vocabulary,
    /// Per document, the vocabulary indices of its in-vocabulary tokens.
    pub docs: Vec<Vec<u32>>,
    /// Per document, its identifier.
    pub doc_ids: Vec<String>,
}

impl Corpus {
    pub fn new<S: AsRef<[String]>>(ids: Vec<String>, docs: &[S], min_count: u64) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if ids.len() != docs.len() {
            return Err(Error::CountMismatch {
                ids: ids.len(),
                vectors: docs.len(),
            });
        }
        let vocab = Vocabulary::build(docs.iter().map(|d| d.as_ref()), min_count)?;
        let encoded = docs
            .iter()
            .map(|d| d.as_ref().iter().filter_map(|t| vocab.get(t)).collect())
            .collect();
        Ok(Self {
            vocab,
            docs: encoded,
            doc_ids: ids,
        })
    }

    pub fn from_dataset(ds: &super::PairDataset, min_count: u64) -> Result<Self> {
        let ids = ds.documents.iter().map(|d| d.id.clone()).collect();
        let toks: Vec<&[String]> = ds.documents.iter().map(|d| d.tokens.as_slice()).collect();
        Self::new(ids, &toks, min_count)
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    fn three_docs() -> Vec<Vec<String>> {
        vec![toks(&["cat", "cat", "dog"]), toks(&["dog"]), toks(&["bird"])]
    }

    #[test]
    fn min_count_filters_rare_tokens() {
        let v = Vocabulary::build(three_docs(), 2).unwrap();
        assert_eq!(v.tokens(), ["cat", "dog"]);
        let cat = v.get("cat").unwrap();
        let dog = v.get("dog").unwrap();
        assert_eq!((v.count(cat), v.doc_freq(cat)), (2, 1));
        assert_eq!((v.count(dog), v.doc_freq(dog)), (2, 2));
        assert_eq!(v.n_docs(), 3);
        assert!(v.get("bird").is_none());
    }

    #[test]
    fn min_count_one_keeps_everything() {
        let v = Vocabulary::build(three_docs(), 1).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.n_docs(), 3);
        assert_eq!(v.tokens(), ["cat", "dog", "bird"]);
    }

    #[test]
    fn min_count_too_large_is_an_error() {
        assert!(matches!(
            Vocabulary::build(three_docs(), 10),
            Err(Error::EmptyVocabulary { min_count: 10 })
        ));
    }

    #[test]
    fn tfidf_matches_hand_computation() {
        let v = Vocabulary::build(three_docs(), 1).unwrap();
        let idf_cat = (4.0f64 / 2.0).ln() + 1.0;
        let idf_dog = (4.0f64 / 3.0).ln() + 1.0;
        assert!((v.idf(v.get("cat").unwrap()) - 1.6931).abs() < 1e-4);
        assert!((v.idf(v.get("dog").unwrap()) - 1.2877).abs() < 1e-4);

        let w = tfidf_weights(&toks(&["cat", "cat", "dog"]), &v).unwrap();
        let raw_cat = 2.0 * idf_cat;
        let raw_dog = idf_dog;
        assert!((raw_cat - 3.3863).abs() < 1e-4);
        assert_eq!(w[0].0, "cat");
        assert!((w[0].1 - raw_cat / (raw_cat + raw_dog)).abs() < 1e-12);
        assert!((w[0].1 - 0.7245).abs() < 1e-4);
        assert!((w[1].1 - 0.2755).abs() < 1e-4);
    }

    #[test]
    fn tfidf_single_token_and_oov() {
        let v = Vocabulary::build(three_docs(), 1).unwrap();
        let w = tfidf_weights(&toks(&["dog"]), &v).unwrap();
        assert_eq!(w, vec![("dog".to_string(), 1.0)]);
        assert!(matches!(
            tfidf_weights(&toks(&["zebra", "yak"]), &v),
            Err(Error::AllOutOfVocabulary)
        ));
        let mixed = tfidf_weights(&toks(&["zebra", "dog"]), &v).unwrap();
        assert_eq!(mixed.len(), 1);
    }

    proptest! {
        #[test]
        fn tfidf_is_a_convex_combination(
            docs in prop::collection::vec(prop::collection::vec(0u8..6, 1..8), 1..10),
            query in prop::collection::vec(0u8..8, 1..10),
        ) {
            let docs: Vec<Vec<String>> = docs.iter().map(|d| d.iter().map(|t| format!("t{t}")).collect()).collect();
            let v = Vocabulary::build(&docs, 1).unwrap();
            let q: Vec<String> = query.iter().map(|t| format!("t{t}")).collect();
            if let Ok(w) = tfidf_weights(&q, &v) {
                let total: f64 = w.iter().map(|x| x.1).sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
                prop_assert!(w.iter().all(|x| x.1 >= 0.0));
            } else {
                prop_assert!(q.iter().all(|t| v.get(t).is_none()));
            }
        }

        #[test]
        fn index_assignment_ignores_document_order(
            docs in prop::collection::vec(prop::collection::vec(0u8..10, 1..6), 1..12),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let docs: Vec<Vec<String>> = docs.iter().map(|d| d.iter().map(|t| format!("w{t}")).collect()).collect();
            let mut shuffled = docs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = Vocabulary::build(&docs, 1).unwrap();
            let b = Vocabulary::build(&shuffled, 1).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
