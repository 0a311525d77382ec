//! Joint text-image embedding spaces learnt from image-caption pairs.
//!
//! The pipeline has three stages:
//!
//! 1. train a text embedding model ([`textemb`]) on the captions of a
//!    [`corpus::PairDataset`],
//! 2. regress image feature vectors into that text space with a sigmoid
//!    cross-entropy loss ([`regressor`]),
//! 3. index the visual embeddings and answer text, image, or mixed weighted
//!    queries by cosine similarity ([`retrieval`]).
//!
//! [`eval`] holds the retrieval metrics, the evaluation protocols, the
//! text/image distance correlation analysis, exact t-SNE and the canvas
//! layout used to render projected spaces.
//!
//! Data-parallel loops (index scans, co-occurrence counting, t-SNE gradients,
//! batched evaluation) run on rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain iterators otherwise. Results are
//! identical either way.

pub mod binio;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod parallel;
pub mod pipeline;
pub mod regressor;
pub mod retrieval;
pub mod textemb;

pub use error::{Error, Result};
