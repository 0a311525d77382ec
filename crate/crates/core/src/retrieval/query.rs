use serde::{Deserialize, Serialize};

use super::index::norm;
use crate::error::{Error, Result};

/// Where a query term's vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermSource {
    Text,
    Image,
    Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTerm {
    pub vector: Vec<f64>,
    pub weight: f64,
    pub source: TermSource,
}

/// A weighted signed combination of embeddings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Query {
    terms: Vec<QueryTerm>,
    resolved: Option<Vec<f64>>,
}

impl Query {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_term(mut self, vector: Vec<f64>, weight: f64, source: TermSource) -> Self {
        self.push(vector, weight, source);
        self
    }

    pub fn push(&mut self, vector: Vec<f64>, weight: f64, source: TermSource) {
        self.terms.push(QueryTerm { vector, weight, source });
        self.resolved = None;
    }

    pub fn terms(&self) -> &[QueryTerm] {
        &self.terms
    }

    /// The composed query vector, cached after the first call.
    pub fn vector(&mut self) -> Result<&[f64]> {
        if self.resolved.is_none() {
            let terms: Vec<(&[f64], f64)> = self.terms.iter().map(|t| (t.vector.as_slice(), t.weight)).collect();
            self.resolved = Some(compose_query(&terms)?);
        }
        Ok(self.resolved.as_deref().expect("resolved above"))
    }
}

/// Returns `sum_i w_i * e_i / |e_i|`, left unnormalised.
pub fn compose_query(terms: &[(&[f64], f64)]) -> Result<Vec<f64>> {
    let dim = match terms.first() {
        Some((v, _)) => v.len(),
        None => return Err(Error::param("a query needs at least one term")),
    };
    let mut out = vec![0.0; dim];
    for (v, w) in terms {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        if !w.is_finite() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("query term"));
        }
        let n = norm(v);
        if n == 0.0 {
            return Err(Error::ZeroVector(None));
        }
        out.iter_mut().zip(v.iter()).for_each(|(o, x)| *o += w * x / n);
    }
    Ok(out)
}
