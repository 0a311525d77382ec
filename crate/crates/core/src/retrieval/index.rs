use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel;

/// Immutable set of unit-norm rows keyed by unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex {
    ids: Vec<String>,
    rows: Vec<f32>,
    /// Euclidean norms of the stored `f32` rows, within rounding of 1.
    norms: Vec<f64>,
    dim: usize,
    positions: HashMap<String, usize>,
}

/// Ranked hits of one search, most similar first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedResult {
    /// The query vector that was searched, as given.
    pub query: Vec<f64>,
    pub hits: Vec<(String, f64)>,
}

impl RankedResult {
    pub fn ids(&self) -> Vec<&str> {
        self.hits.iter().map(|(id, _)| id.as_str()).collect()
    }
}

/// Builds an index, normalising every vector to unit length.
pub fn build_index<V: AsRef<[f64]>>(ids: &[String], vectors: &[V]) -> Result<EmbeddingIndex> {
    if ids.len() != vectors.len() {
        return Err(Error::CountMismatch {
            ids: ids.len(),
            vectors: vectors.len(),
        });
    }
    let dim = vectors.first().map_or(0, |v| v.as_ref().len());
    let mut rows = Vec::with_capacity(ids.len() * dim);
    for (id, v) in ids.iter().zip(vectors) {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("index vector"));
        }
        let norm = norm(v);
        if norm == 0.0 {
            return Err(Error::ZeroVector(Some(id.clone())));
        }
        rows.extend(v.iter().map(|x| (x / norm) as f32));
    }
    EmbeddingIndex::from_normalized(ids.to_vec(), rows, dim)
}

impl EmbeddingIndex {
    /// Wraps rows that are already unit-normalised (as stored on disk).
    pub(crate) fn from_normalized(ids: Vec<String>, rows: Vec<f32>, dim: usize) -> Result<Self> {
        let mut positions = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if positions.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        if dim == 0 && !ids.is_empty() {
            return Err(Error::param("index rows must have positive dimension"));
        }
        if rows.len() != ids.len() * dim {
            return Err(Error::CountMismatch {
                ids: ids.len(),
                vectors: rows.len() / dim.max(1),
            });
        }
        let norms = rows.chunks(dim.max(1)).map(norm_f32).collect();
        Ok(Self {
            ids,
            rows,
            norms,
            dim,
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn raw_rows(&self) -> &[f32] {
        &self.rows
    }

    /// Stored unit vector of `id`.
    pub fn vector(&self, id: &str) -> Result<Vec<f64>> {
        let i = self.position(id).ok_or_else(|| Error::UnknownId(id.to_string()))?;
        Ok(self.row(i).iter().map(|&x| x as f64).collect())
    }

    /// The `k` stored items closest to `id`, excluding `id` itself.
    pub fn neighbors(&self, id: &str, k: usize) -> Result<RankedResult> {
        let q = self.vector(id)?;
        let mut res = search(self, &q, k.saturating_add(1))?;
        let before = res.hits.len();
        res.hits.retain(|(hit, _)| hit != id);
        if res.hits.len() == before {
            res.hits.truncate(k);
        }
        Ok(res)
    }
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector(None));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(cosine_from_parts(dot, na, nb))
}

fn cosine_from_parts(dot: f64, na: f64, nb: f64) -> f64 {
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Exhaustive top-`k` search by cosine similarity.
///
/// Returns at most `k` hits ordered by descending similarity, ties broken by
/// ascending id.
pub fn search(index: &EmbeddingIndex, query: &[f64], k: usize) -> Result<RankedResult> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if query.len() != index.dim {
        return Err(Error::DimensionMismatch {
            expected: index.dim,
            actual: query.len(),
        });
    }
    if query.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("query vector"));
    }
    let qn = norm(query);
    if qn == 0.0 {
        return Err(Error::ZeroVector(None));
    }
    // Same arithmetic as `cosine_similarity(row, query)` so scores agree bit for bit.
    let scores = parallel::map_range(index.len(), |i| {
        let dot = index.row(i).iter().zip(query).map(|(&r, q)| r as f64 * q).sum::<f64>();
        cosine_from_parts(dot, index.norms[i], qn)
    });

    let order = |a: &usize, b: &usize| -> Ordering {
        scores[*b]
            .total_cmp(&scores[*a])
            .then_with(|| index.ids[*a].cmp(&index.ids[*b]))
    };
    let mut positions: Vec<usize> = (0..index.len()).collect();
    let k = k.min(positions.len());
    if k < positions.len() {
        positions.select_nth_unstable_by(k - 1, order);
        positions.truncate(k);
    }
    positions.sort_unstable_by(order);
    Ok(RankedResult {
        query: query.to_vec(),
        hits: positions
            .into_iter()
            .map(|i| (index.ids[i].clone(), scores[i]))
            .collect(),
    })
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm_f32(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}
