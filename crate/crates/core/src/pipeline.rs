//! End-to-end training of a text model plus its visual regressor.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PairDataset, DEFAULT_MIN_COUNT};
use crate::error::Result;
use crate::parallel;
use crate::regressor::{train_visual, RegressorConfig, TrainReport, VisualRegressor};
use crate::retrieval::{build_index, EmbeddingIndex};
use crate::textemb::{Method, TextConfig, TextEmbeddingModel};

/// Anything that maps captions and image features into one joint space.
pub trait JointEmbedder: Sync {
    fn embed_text(&self, tokens: &[String]) -> Result<Vec<f64>>;
    fn embed_image(&self, feature: &[f32]) -> Result<Vec<f64>>;
}

/// Index of the image embeddings of every item in `ds`.
pub fn index_images(model: &dyn JointEmbedder, ds: &PairDataset) -> Result<EmbeddingIndex> {
    let vectors = parallel::map_range(ds.len(), |i| model.embed_image(ds.feature(i)));
    let vectors = vectors.into_iter().collect::<Result<Vec<_>>>()?;
    let ids: Vec<String> = ds.documents.iter().map(|d| d.id.clone()).collect();
    build_index(&ids, &vectors)
}

/// Text and visual hyper-parameters of a full training run.
///
/// The regressor's input and output dimensions are filled in from the data
/// and the text model at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub text: TextConfig,
    pub min_count: u64,
    pub regressor: RegressorConfig,
}

impl PipelineSpec {
    pub fn new(method: Method, dim: usize, seed: u64) -> Self {
        Self {
            text: TextConfig::with_defaults(method, dim, seed),
            min_count: DEFAULT_MIN_COUNT,
            regressor: RegressorConfig {
                seed,
                ..RegressorConfig::default()
            },
        }
    }

    /// Same spec with every random seed replaced by `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.text.set_seed(seed);
        self.regressor.seed = seed;
        self
    }

    pub fn train(&self, ds: &PairDataset) -> Result<TrainedPipeline> {
        let corpus = Corpus::from_dataset(ds, self.min_count)?;
        let text = self.text.train(&corpus)?;
        let cfg = RegressorConfig {
            input_dim: ds.feature_dim(),
            output_dim: text.dim(),
            ..self.regressor.clone()
        };
        let (visual, report) = train_visual(ds, &text, &cfg)?;
        Ok(TrainedPipeline { text, visual, report })
    }
}

#[derive(Debug, Clone)]
pub struct TrainedPipeline {
    pub text: TextEmbeddingModel,
    pub visual: VisualRegressor,
    pub report: TrainReport,
}

impl TrainedPipeline {
    pub fn model(&self) -> JointModel<'_> {
        JointModel {
            text: &self.text,
            visual: &self.visual,
        }
    }
}

impl JointEmbedder for TrainedPipeline {
    fn embed_text(&self, tokens: &[String]) -> Result<Vec<f64>> {
        self.model().embed_text(tokens)
    }

    fn embed_image(&self, feature: &[f32]) -> Result<Vec<f64>> {
        self.model().embed_image(feature)
    }
}

/// A text model and the regressor trained against it.
///
/// Captions are embedded with the aggregation the regressor was trained on.
#[derive(Debug, Clone, Copy)]
pub struct JointModel<'a> {
    pub text: &'a TextEmbeddingModel,
    pub visual: &'a VisualRegressor,
}

impl JointEmbedder for JointModel<'_> {
    fn embed_text(&self, tokens: &[String]) -> Result<Vec<f64>> {
        Ok(self
            .text
            .embed_document(tokens, self.visual.config.aggregation)?
            .into_inner())
    }

    fn embed_image(&self, feature: &[f32]) -> Result<Vec<f64>> {
        self.visual.forward(feature)
    }
}
