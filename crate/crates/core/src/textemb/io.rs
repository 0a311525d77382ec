//! `JTIE` model container for text embedding models.
//!
//! Layout (little-endian): magic `JTIE`, version `u32`, method tag `u8`,
//! `D` as `u32`, vocabulary block (`u32` count, `u64` document count, then per
//! token a length-prefixed UTF-8 string, `u64` count and `u64` df), the
//! `|V| x D` vector table as `f32`, the method block, and finally the training
//! configuration as a length-prefixed JSON string.

use std::io::{Read, Write};

use byteorder::{ReadBytesExt, WriteBytesExt};

use super::doc2vec::DocTable;
use super::fasttext::SubwordTable;
use super::lda::LdaState;
use super::{Method, MethodState, TextConfig, TextEmbeddingModel};
use crate::binio;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"JTIE";
pub const MODEL_VERSION: u32 = 1;
const KIND: &str = "model";

pub fn write_model<W: Write>(w: &mut W, m: &TextEmbeddingModel) -> Result<()> {
    binio::write_magic(w, MODEL_MAGIC, MODEL_VERSION)?;
    w.write_u8(m.method.tag())?;
    binio::write_u32(w, m.dim)?;

    let vocab = &m.vocab;
    binio::write_u32(w, vocab.len())?;
    binio::write_u64(w, vocab.n_docs())?;
    for (i, tok) in vocab.tokens().iter().enumerate() {
        binio::write_str(w, tok)?;
        binio::write_u64(w, vocab.counts()[i])?;
        binio::write_u64(w, vocab.doc_freqs()[i])?;
    }
    binio::write_f32s(w, &m.vectors)?;

    match &m.state {
        MethodState::Plain => {}
        MethodState::Lda(s) => {
            binio::write_u32(w, s.topics)?;
            binio::write_f64(w, s.alpha)?;
            binio::write_f64(w, s.beta)?;
            binio::write_f64s(w, &s.topic_word)?;
        }
        MethodState::FastText(t) => {
            binio::write_u32(w, t.ngram_min)?;
            binio::write_u32(w, t.ngram_max)?;
            binio::write_u32(w, t.buckets as usize)?;
            binio::write_u32(w, t.rows.len())?;
            for (&b, row) in &t.rows {
                binio::write_u32(w, b as usize)?;
                binio::write_f32s(w, row)?;
            }
        }
        MethodState::Doc2Vec(t) => {
            binio::write_u32(w, t.ids.len())?;
            for id in &t.ids {
                binio::write_str(w, id)?;
            }
            binio::write_f32s(w, &t.vectors)?;
            binio::write_f32s(w, &t.outputs)?;
        }
    }

    let cfg = serde_json::to_string(&m.config).map_err(|e| Error::format(KIND, e.to_string()))?;
    binio::write_str(w, &cfg)?;
    Ok(())
}

pub fn read_model<R: Read>(r: &mut R) -> Result<TextEmbeddingModel> {
    let version = binio::read_magic(r, MODEL_MAGIC, KIND)?;
    if version != MODEL_VERSION {
        return Err(Error::format(KIND, format!("unsupported version {version}")));
    }
    let tag = r.read_u8()?;
    let method = Method::from_tag(tag)
        .ok_or_else(|| Error::format(KIND, format!("method tag {tag} is not a text embedding model")))?;
    let dim = binio::read_u32(r)?;

    let n = binio::read_u32(r)?;
    let n_docs = binio::read_u64(r)?;
    let mut tokens = Vec::with_capacity(n.min(1 << 20));
    let mut counts = Vec::with_capacity(n.min(1 << 20));
    let mut dfs = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        tokens.push(binio::read_str(r, KIND)?);
        counts.push(binio::read_u64(r)?);
        dfs.push(binio::read_u64(r)?);
    }
    let vocab = Vocabulary::from_parts(tokens, counts, dfs, n_docs);
    let vectors = binio::read_f32s(r, n * dim)?;

    let state = match method {
        Method::Word2Vec | Method::Glove => MethodState::Plain,
        Method::Lda => {
            let topics = binio::read_u32(r)?;
            if topics != dim {
                return Err(Error::format(KIND, "topic count differs from dimension"));
            }
            let alpha = binio::read_f64(r)?;
            let beta = binio::read_f64(r)?;
            let topic_word = binio::read_f64s(r, topics * n)?;
            MethodState::Lda(LdaState {
                topics,
                alpha,
                beta,
                topic_word,
            })
        }
        Method::FastText => {
            let ngram_min = binio::read_u32(r)?;
            let ngram_max = binio::read_u32(r)?;
            let buckets = binio::read_u32(r)? as u32;
            let stored = binio::read_u32(r)?;
            let mut rows = std::collections::BTreeMap::new();
            for _ in 0..stored {
                let b = binio::read_u32(r)? as u32;
                rows.insert(b, binio::read_f32s(r, dim)?);
            }
            MethodState::FastText(SubwordTable {
                ngram_min,
                ngram_max,
                buckets,
                rows,
            })
        }
        Method::Doc2Vec => {
            let count = binio::read_u32(r)?;
            let mut ids = Vec::with_capacity(count.min(1 << 20));
            for _ in 0..count {
                ids.push(binio::read_str(r, KIND)?);
            }
            let doc_vectors = binio::read_f32s(r, count * dim)?;
            let outputs = binio::read_f32s(r, n * dim)?;
            MethodState::Doc2Vec(DocTable::new(ids, doc_vectors, outputs))
        }
    };

    let cfg_json = binio::read_str(r, KIND)?;
    let config: TextConfig = serde_json::from_str(&cfg_json).map_err(|e| Error::format(KIND, e.to_string()))?;
    if config.method() != method {
        return Err(Error::format(KIND, "configuration does not match method tag"));
    }
    Ok(TextEmbeddingModel {
        method,
        dim,
        vocab,
        vectors,
        state,
        config,
    })
}
