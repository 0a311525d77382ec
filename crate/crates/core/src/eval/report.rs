use serde::Serialize;

use crate::error::{Error, Result};

/// Score of one evaluated query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryScore {
    pub query: String,
    pub value: f64,
}

/// Per-query scores of one protocol run and their mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub protocol: String,
    /// `"ap"` or `"p@K"`.
    pub metric: String,
    pub per_query: Vec<QueryScore>,
    pub aggregate: f64,
    /// Queries that could not be evaluated, with the reason.
    pub skipped: Vec<(String, String)>,
    pub split_seed: Option<u64>,
    pub k: Option<usize>,
}

impl EvalReport {
    pub(crate) fn new(
        protocol: &str,
        metric: String,
        per_query: Vec<QueryScore>,
        skipped: Vec<(String, String)>,
        split_seed: Option<u64>,
        k: Option<usize>,
    ) -> Result<Self> {
        if per_query.is_empty() {
            return Err(Error::Evaluation(format!(
                "{protocol}: no query could be evaluated ({} skipped)",
                skipped.len()
            )));
        }
        let aggregate = per_query.iter().map(|q| q.value).sum::<f64>() / per_query.len() as f64;
        Ok(Self {
            protocol: protocol.to_string(),
            metric,
            per_query,
            aggregate,
            skipped,
            split_seed,
            k,
        })
    }

    pub fn value(&self, query: &str) -> Option<f64> {
        self.per_query.iter().find(|q| q.query == query).map(|q| q.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One `query<TAB>value` row per query, then the aggregate row.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("query\t{}\n", self.metric);
        for q in &self.per_query {
            out.push_str(&format!("{}\t{}\n", q.query, q.value));
        }
        let label = if self.metric == "ap" { "MAP" } else { "mean" };
        out.push_str(&format!("{label}\t{}\n", self.aggregate));
        out
    }
}
