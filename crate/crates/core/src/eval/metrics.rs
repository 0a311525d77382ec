use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};

/// Which retrieved ids count as correct for one query.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelevanceJudgment {
    relevant: HashSet<String>,
}

impl RelevanceJudgment {
    pub fn from_ids<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            relevant: ids.into_iter().map(Into::into).collect(),
        }
    }

    /// Items carrying every one of `concepts` among their tags.
    pub fn containing_all<'a, I>(concepts: &BTreeSet<String>, items: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a BTreeSet<String>)>,
    {
        Self::from_ids(
            items
                .into_iter()
                .filter(|(_, tags)| concepts.is_subset(tags))
                .map(|(id, _)| id),
        )
    }

    /// Items sharing at least one tag with `tags`.
    pub fn sharing_any<'a, I>(tags: &BTreeSet<String>, items: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a BTreeSet<String>)>,
    {
        Self::from_ids(
            items
                .into_iter()
                .filter(|(_, t)| !t.is_disjoint(tags))
                .map(|(id, _)| id),
        )
    }

    pub fn is_relevant(&self, id: &str) -> bool {
        self.relevant.contains(id)
    }

    pub fn len(&self) -> usize {
        self.relevant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relevant.is_empty()
    }
}

/// Fraction of the first `k` ranked ids that are relevant, always over `k`.
pub fn precision_at_k<S: AsRef<str>>(ranked: &[S], judgment: &RelevanceJudgment, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if ranked.is_empty() {
        return Err(Error::Evaluation("empty ranking".into()));
    }
    let hits = ranked
        .iter()
        .take(k)
        .filter(|id| judgment.is_relevant(id.as_ref()))
        .count();
    Ok(hits as f64 / k as f64)
}

/// Average precision over the whole ranking.
///
/// The denominator is the size of the judgment, so relevant items missing
/// from the ranking count as never retrieved. Callers restrict the judgment
/// to the searched collection.
pub fn average_precision<S: AsRef<str>>(ranked: &[S], judgment: &RelevanceJudgment) -> Result<f64> {
    if judgment.is_empty() {
        return Err(Error::Evaluation("relevant set is empty".into()));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, id) in ranked.iter().enumerate() {
        if judgment.is_relevant(id.as_ref()) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / judgment.len() as f64)
}
