//! `JIDX` files: magic, `u32` version, `u32` dimension, `u32` count, the id
//! table as length-prefixed UTF-8, then the row-major unit-norm `f32` matrix.

use std::io::{Read, Write};

use super::EmbeddingIndex;
use crate::binio;
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &[u8; 4] = b"JIDX";
pub const INDEX_VERSION: u32 = 1;
const KIND: &str = "index";

pub fn write_index<W: Write>(w: &mut W, index: &EmbeddingIndex) -> Result<()> {
    binio::write_magic(w, INDEX_MAGIC, INDEX_VERSION)?;
    binio::write_u32(w, index.dim())?;
    binio::write_u32(w, index.len())?;
    for id in index.ids() {
        binio::write_str(w, id)?;
    }
    binio::write_f32s(w, index.raw_rows())?;
    Ok(())
}

pub fn read_index<R: Read>(r: &mut R) -> Result<EmbeddingIndex> {
    let version = binio::read_magic(r, INDEX_MAGIC, KIND)?;
    if version != INDEX_VERSION {
        return Err(Error::format(KIND, format!("unsupported version {version}")));
    }
    let dim = binio::read_u32(r)?;
    let count = binio::read_u32(r)?;
    let mut ids = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        ids.push(binio::read_str(r, KIND)?);
    }
    let rows = binio::read_f32s(r, dim * count)?;
    EmbeddingIndex::from_normalized(ids, rows, dim)
}
