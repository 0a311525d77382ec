use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize;
use crate::binio;
use crate::error::{Error, Result};

const FEATURE_MAGIC: &[u8; 4] = b"FEAT";
const FEATURE_VERSION: u32 = 1;

/// A caption with its identifier and optional ground-truth tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub raw: String,
    pub tokens: Vec<String>,
    pub tags: BTreeSet<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, raw: impl Into<String>) -> Self {
        let raw = raw.into();
        Self {
            id: id.into(),
            tokens: tokenize(&raw),
            raw,
            tags: BTreeSet::new(),
        }
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self
    }
}

/// One line of the caption file.
#[derive(Debug, Serialize, Deserialize)]
struct CaptionRecord {
    id: String,
    caption: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tags: Vec<String>,
    /// Inline feature vector, an alternative to the binary sidecar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature: Option<Vec<f32>>,
}

/// Image-caption pairs: every document owns exactly one feature vector of
/// dimension `feature_dim`, stored row-major in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDataset {
    pub documents: Vec<Document>,
    features: Vec<f32>,
    feature_dim: usize,
}

impl PairDataset {
    pub fn new(documents: Vec<Document>, features: Vec<Vec<f32>>) -> Result<Self> {
        if documents.len() != features.len() {
            return Err(Error::CountMismatch {
                ids: documents.len(),
                vectors: features.len(),
            });
        }
        let dim = features.first().map_or(0, Vec::len);
        let mut seen = HashSet::new();
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::DuplicateId(d.id.clone()));
            }
        }
        let mut flat = Vec::with_capacity(dim * features.len());
        for f in &features {
            if f.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: f.len(),
                });
            }
            flat.extend_from_slice(f);
        }
        Ok(Self {
            documents,
            features: flat,
            feature_dim: dim,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn feature(&self, i: usize) -> &[f32] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.documents.iter().position(|d| d.id == id)
    }

    /// Keeps the documents at `positions`, in that order.
    pub fn subset(&self, positions: &[usize]) -> Self {
        let mut features = Vec::with_capacity(positions.len() * self.feature_dim);
        for &p in positions {
            features.extend_from_slice(self.feature(p));
        }
        Self {
            documents: positions.iter().map(|&p| self.documents[p].clone()).collect(),
            features,
            feature_dim: self.feature_dim,
        }
    }

    /// Writes the caption file (one JSON object per line) without inline features.
    pub fn write_captions(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        for d in &self.documents {
            let rec = CaptionRecord {
                id: d.id.clone(),
                caption: d.raw.clone(),
                tags: d.tags.iter().cloned().collect(),
                feature: None,
            };
            serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the binary feature sidecar.
    pub fn write_features(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        let rows: Vec<(&str, &[f32])> = self
            .documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.as_str(), self.feature(i)))
            .collect();
        write_features(&mut w, self.feature_dim, &rows)?;
        w.flush()?;
        Ok(())
    }
}

/// Serializes `(id, vector)` rows in the `FEAT` sidecar layout.
pub fn write_features<W: Write>(w: &mut W, dim: usize, rows: &[(&str, &[f32])]) -> Result<()> {
    binio::write_magic(w, FEATURE_MAGIC, FEATURE_VERSION)?;
    binio::write_u32(w, rows.len())?;
    binio::write_u32(w, dim)?;
    for (id, v) in rows {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        binio::write_str(w, id)?;
        binio::write_f32s(w, v)?;
    }
    Ok(())
}

/// Feature rows keyed by document id.
pub type FeatureRows = Vec<(String, Vec<f32>)>;

/// Reads a `FEAT` sidecar into `(dim, [(id, vector)])`.
pub fn read_features<R: Read>(r: &mut R) -> Result<(usize, FeatureRows)> {
    let version = binio::read_magic(r, FEATURE_MAGIC, "feature")?;
    if version != FEATURE_VERSION {
        return Err(Error::format("feature", format!("unsupported version {version}")));
    }
    let count = binio::read_u32(r)?;
    let dim = binio::read_u32(r)?;
    let mut rows = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let id = binio::read_str(r, "feature")?;
        let v =
            binio::read_f32s(r, dim).map_err(|_| Error::format("feature", format!("truncated record for `{id}`")))?;
        rows.push((id, v));
    }
    Ok((dim, rows))
}

/// Loads a caption file plus, optionally, its binary feature sidecar.
///
/// Records may instead carry their vector inline in a `feature` field. Line
/// numbers in errors are 1-based.
pub fn load_pairs(captions: &Path, features: Option<&Path>) -> Result<PairDataset> {
    let file = File::open(captions).map_err(|source| Error::File {
        path: captions.to_owned(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut sidecar: HashMap<String, Vec<f32>> = HashMap::new();
    let mut dim: Option<usize> = None;
    if let Some(path) = features {
        let f = File::open(path).map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })?;
        let (d, rows) = read_features(&mut BufReader::new(f))?;
        dim = Some(d);
        for (id, v) in rows {
            if sidecar.insert(id.clone(), v).is_some() {
                return Err(Error::DuplicateId(id));
            }
        }
    }

    let mut documents = Vec::new();
    let mut vectors = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CaptionRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            message: e.to_string(),
        })?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId(rec.id));
        }
        let vector = match rec.feature {
            Some(v) => v,
            None => sidecar
                .remove(&rec.id)
                .ok_or_else(|| Error::MissingFeature(rec.id.clone()))?,
        };
        match dim {
            Some(d) if d != vector.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: vector.len(),
                })
            }
            None => dim = Some(vector.len()),
            _ => {}
        }
        documents.push(Document::new(rec.id, rec.caption).with_tags(rec.tags));
        vectors.push(vector);
    }
    PairDataset::new(documents, vectors)
}
