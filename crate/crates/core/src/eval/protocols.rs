use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::metrics::{average_precision, precision_at_k, RelevanceJudgment};
use super::report::{EvalReport, QueryScore};
use crate::corpus::{inject_caption_noise, tokenize, PairDataset};
use crate::error::{Error, Result};
use crate::parallel;
use crate::pipeline::{index_images, JointEmbedder, PipelineSpec};
use crate::retrieval::{search, EmbeddingIndex};

/// How a dataset is divided into two parts.
#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    /// A seeded random `fraction` of the items forms the selected part.
    Random { fraction: f64, seed: u64 },
    /// The listed ids form the selected part.
    Explicit(Vec<String>),
}

impl Split {
    /// Query part of the tag protocol: 5% of the items.
    pub fn tag_default(seed: u64) -> Self {
        Split::Random { fraction: 0.05, seed }
    }

    /// Retrieval part of the class protocol: half of the items.
    pub fn class_default(seed: u64) -> Self {
        Split::Random { fraction: 0.5, seed }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Split::Random { seed, .. } => Some(*seed),
            Split::Explicit(_) => None,
        }
    }

    /// Positions of the selected part and of the rest, each ascending.
    pub fn apply(&self, ds: &PairDataset) -> Result<(Vec<usize>, Vec<usize>)> {
        let n = ds.len();
        let mut selected = vec![false; n];
        match self {
            Split::Random { fraction, seed } => {
                if !(0.0..=1.0).contains(fraction) {
                    return Err(Error::param("split fraction must lie in [0, 1]"));
                }
                let take = (fraction * n as f64).round() as usize;
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
                order[..take].iter().for_each(|&p| selected[p] = true);
            }
            Split::Explicit(ids) => {
                for id in ids {
                    let p = ds.position(id).ok_or_else(|| Error::UnknownId(id.clone()))?;
                    selected[p] = true;
                }
            }
        }
        let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&p| selected[p]);
        if a.is_empty() || b.is_empty() {
            return Err(Error::Evaluation(format!(
                "split leaves an empty part ({} selected, {} rest)",
                a.len(),
                b.len()
            )));
        }
        Ok((a, b))
    }
}

fn tag_tokens(tags: &BTreeSet<String>) -> Vec<String> {
    tags.iter().flat_map(|t| tokenize(t)).collect()
}

fn items(ds: &PairDataset) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
    ds.documents.iter().map(|d| (d.id.as_str(), &d.tags))
}

enum Metric {
    AveragePrecision,
    PrecisionAt(usize),
}

impl Metric {
    fn name(&self) -> String {
        match self {
            Metric::AveragePrecision => "ap".into(),
            Metric::PrecisionAt(k) => format!("p@{k}"),
        }
    }

    fn k(&self) -> Option<usize> {
        match self {
            Metric::AveragePrecision => None,
            Metric::PrecisionAt(k) => Some(*k),
        }
    }

    fn score(
        &self,
        model: &dyn JointEmbedder,
        index: &EmbeddingIndex,
        tokens: &[String],
        judgment: &RelevanceJudgment,
    ) -> Result<f64> {
        let q = model.embed_text(tokens)?;
        let depth = match self {
            Metric::AveragePrecision => index.len(),
            Metric::PrecisionAt(k) => *k,
        };
        let ranked = search(index, &q, depth)?;
        let ids = ranked.ids();
        match self {
            Metric::AveragePrecision => average_precision(&ids, judgment),
            Metric::PrecisionAt(k) => precision_at_k(&ids, judgment, *k),
        }
    }
}

struct QuerySpec {
    name: String,
    tokens: Vec<String>,
    judgment: RelevanceJudgment,
}

fn run_queries(
    protocol: &str,
    model: &dyn JointEmbedder,
    index: &EmbeddingIndex,
    queries: Vec<QuerySpec>,
    metric: Metric,
    seed: Option<u64>,
) -> Result<EvalReport> {
    let mut skipped = Vec::new();
    let mut runnable = Vec::new();
    for q in queries {
        if q.tokens.is_empty() {
            skipped.push((q.name, "no query terms".to_string()));
        } else if q.judgment.is_empty() {
            skipped.push((q.name, "no relevant item in the retrieval set".to_string()));
        } else {
            runnable.push(q);
        }
    }
    let scores = parallel::map(&runnable, |q| metric.score(model, index, &q.tokens, &q.judgment));
    let mut per_query = Vec::new();
    for (q, s) in runnable.into_iter().zip(scores) {
        match s {
            Ok(value) => per_query.push(QueryScore { query: q.name, value }),
            Err(Error::AllOutOfVocabulary) | Err(Error::OutOfVocabulary(_)) => {
                skipped.push((q.name, "query terms are out of vocabulary".to_string()))
            }
            Err(Error::ZeroVector(_)) => skipped.push((q.name, "query embedding is zero".to_string())),
            Err(e) => return Err(e),
        }
    }
    if !skipped.is_empty() {
        log::warn!("{protocol}: skipped {} queries", skipped.len());
    }
    EvalReport::new(protocol, metric.name(), per_query, skipped, seed, metric.k())
}

/// Image-to-image retrieval through tags.
///
/// The selected part of `split` holds the query images, the rest is both
/// the training and the retrieval set. Each query is the text embedding of
/// its image's tags; a retrieved image is correct when it shares at least
/// one tag with the query image. The report holds one AP per query.
pub fn map_tag_protocol<M, B>(ds: &PairDataset, build: B, split: &Split) -> Result<EvalReport>
where
    M: JointEmbedder,
    B: FnOnce(&PairDataset) -> Result<M>,
{
    let (query_pos, rest) = split.apply(ds)?;
    let retrieval = ds.subset(&rest);
    let model = build(&retrieval)?;
    let index = index_images(&model, &retrieval)?;
    let queries = query_pos
        .iter()
        .map(|&p| {
            let doc = &ds.documents[p];
            QuerySpec {
                name: doc.id.clone(),
                tokens: tag_tokens(&doc.tags),
                judgment: RelevanceJudgment::sharing_any(&doc.tags, items(&retrieval)),
            }
        })
        .collect();
    run_queries(
        "map_tag",
        &model,
        &index,
        queries,
        Metric::AveragePrecision,
        split.seed(),
    )
}

fn class_queries(retrieval: &PairDataset, classes: &[String]) -> Vec<QuerySpec> {
    classes
        .iter()
        .map(|c| {
            let concept: BTreeSet<String> = [c.clone()].into();
            QuerySpec {
                name: c.clone(),
                tokens: tokenize(c),
                judgment: RelevanceJudgment::containing_all(&concept, items(retrieval)),
            }
        })
        .collect()
}

fn class_protocol<M, B>(
    ds: &PairDataset,
    classes: &[String],
    build: B,
    split: &Split,
    metric: Metric,
    name: &str,
) -> Result<EvalReport>
where
    M: JointEmbedder,
    B: FnOnce(&PairDataset) -> Result<M>,
{
    if classes.is_empty() {
        return Err(Error::param("at least one class name is required"));
    }
    let (retrieval_pos, train_pos) = split.apply(ds)?;
    let retrieval = ds.subset(&retrieval_pos);
    let model = build(&ds.subset(&train_pos))?;
    let index = index_images(&model, &retrieval)?;
    run_queries(
        name,
        &model,
        &index,
        class_queries(&retrieval, classes),
        metric,
        split.seed(),
    )
}

/// Class-name queries scored by AP.
///
/// The selected part of `split` is the retrieval set, the rest trains the
/// model. A retrieved image is correct when it is tagged with the class.
/// Classes without tagged retrieval items or with unknown names are skipped.
pub fn map_class_protocol<M, B>(ds: &PairDataset, classes: &[String], build: B, split: &Split) -> Result<EvalReport>
where
    M: JointEmbedder,
    B: FnOnce(&PairDataset) -> Result<M>,
{
    class_protocol(ds, classes, build, split, Metric::AveragePrecision, "map_class")
}

/// Class-name queries scored by precision at `k`, on the same split as
/// [`map_class_protocol`].
pub fn class_precision_protocol<M, B>(
    ds: &PairDataset,
    classes: &[String],
    build: B,
    split: &Split,
    k: usize,
) -> Result<EvalReport>
where
    M: JointEmbedder,
    B: FnOnce(&PairDataset) -> Result<M>,
{
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    class_protocol(ds, classes, build, split, Metric::PrecisionAt(k), "class_precision")
}

/// One row of a noise sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseRow {
    pub fraction: f64,
    /// Mean over seeds of the mean class-name precision at `k`.
    pub mean_precision: f64,
    pub per_seed: Vec<f64>,
}

/// Retrains the whole pipeline with a growing share of swapped captions.
///
/// For every seed the noise injection, the train/retrieval split and every
/// trainer use that seed, so rows differ only by the noise fraction.
pub fn noise_sweep(
    ds: &PairDataset,
    fractions: &[f64],
    spec: &PipelineSpec,
    classes: &[String],
    seeds: &[u64],
    k: usize,
) -> Result<Vec<NoiseRow>> {
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::param("noise fractions must lie in [0, 1]"));
    }
    if seeds.is_empty() {
        return Err(Error::param("at least one seed is required"));
    }
    fractions
        .iter()
        .map(|&fraction| {
            let per_seed = seeds
                .iter()
                .map(|&seed| {
                    let noisy = inject_caption_noise(ds, fraction, seed);
                    let spec = spec.clone().with_seed(seed);
                    let report =
                        class_precision_protocol(&noisy, classes, |d| spec.train(d), &Split::class_default(seed), k)?;
                    Ok(report.aggregate)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(NoiseRow {
                fraction,
                mean_precision: per_seed.iter().sum::<f64>() / per_seed.len() as f64,
                per_seed,
            })
        })
        .collect()
}

/// Noise table as `noise<TAB>mean` rows.
pub fn noise_table_tsv(rows: &[NoiseRow], k: usize) -> String {
    let mut out = format!("noise\tmean_p@{k}\n");
    for r in rows {
        out.push_str(&format!("{}%\t{}\n", (r.fraction * 100.0).round(), r.mean_precision));
    }
    out
}
