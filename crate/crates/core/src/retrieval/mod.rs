//! Exact cosine-similarity search over joint-space embeddings.
//!
//! An [`EmbeddingIndex`] holds unit-normalised rows. [`search`] scores every
//! row against a query and returns the most similar ids first; ties are
//! broken by ascending id so rankings are reproducible. Queries may combine
//! several text, image or raw vector terms with signed weights through
//! [`compose_query`].

mod index;
mod io;
mod query;

pub use index::{build_index, cosine_similarity, search, EmbeddingIndex, RankedResult};
pub use io::{read_index, write_index, INDEX_MAGIC, INDEX_VERSION};
pub use query::{compose_query, Query, QueryTerm, TermSource};
