//! Caption corpora: tokenization, vocabulary statistics, tf-idf weights,
//! image-caption pair datasets, caption noise injection and the synthetic
//! concept generator.

mod dataset;
mod noise;
mod synth;
mod tokenize;
mod vocab;

pub use dataset::{load_pairs, read_features, write_features, Document, FeatureRows, PairDataset};
pub use noise::inject_caption_noise;
pub use synth::{concept_name, generate_synthetic, SyntheticConfig};
pub use tokenize::tokenize;
pub(crate) use vocab::weighted_terms as vocab_weighted_terms;
pub use vocab::{tfidf_weights, Corpus, Vocabulary, DEFAULT_MIN_COUNT};
