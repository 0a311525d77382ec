//! Pipeline configuration file (TOML).
//!
//! Every section is optional. Relative paths are resolved against the
//! directory holding the configuration file.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use jointspace::eval::TsneConfig;
use jointspace::regressor::RegressorConfig;
use jointspace::textemb::{Method, TextConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataConfig,
    #[serde(default = "default_text")]
    pub text: TextConfig,
    pub regressor: RegressorConfig,
    pub artifacts: ArtifactConfig,
    pub eval: EvalConfig,
    pub analysis: AnalysisConfig,
    pub service: ServiceConfig,
    pub synth: SynthConfig,
}

fn default_text() -> TextConfig {
    TextConfig::with_defaults(Method::Word2Vec, 400, 1)
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            data: DataConfig::default(),
            text: default_text(),
            regressor: RegressorConfig::default(),
            artifacts: ArtifactConfig::default(),
            eval: EvalConfig::default(),
            analysis: AnalysisConfig::default(),
            service: ServiceConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// JSON-lines caption file.
    pub captions: PathBuf,
    /// Binary feature sidecar; features are read inline from the captions when unset.
    pub features: Option<PathBuf>,
    pub min_count: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            captions: "data/captions.jsonl".into(),
            features: Some("data/features.bin".into()),
            min_count: jointspace::corpus::DEFAULT_MIN_COUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArtifactConfig {
    pub dir: PathBuf,
}

impl Default for ArtifactConfig {
    fn default() -> Self {
        Self {
            dir: "artifacts".into(),
        }
    }
}

impl ArtifactConfig {
    pub fn text_model(&self) -> PathBuf {
        self.dir.join("text.jtie")
    }

    pub fn visual_model(&self) -> PathBuf {
        self.dir.join("visual.jtie")
    }

    pub fn index(&self) -> PathBuf {
        self.dir.join("index.jidx")
    }

    pub fn loss_curve(&self) -> PathBuf {
        self.dir.join("loss_curve.tsv")
    }

    pub fn eval_dir(&self) -> PathBuf {
        self.dir.join("eval")
    }

    pub fn analysis_dir(&self) -> PathBuf {
        self.dir.join("analysis")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Protocol {
    /// AP of class-name queries.
    ClassMap,
    /// Precision at k of class-name queries.
    ClassPrecision,
    /// AP of tag queries built from held-out images.
    TagMap,
    /// Class precision while captions are swapped.
    NoiseSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub protocols: Vec<Protocol>,
    /// Class names; every distinct tag of the dataset when empty.
    pub classes: Vec<String>,
    pub k: usize,
    pub split_seed: u64,
    pub query_fraction: f64,
    pub retrieval_fraction: f64,
    /// Fixed query ids for the tag protocol instead of a random split.
    pub query_ids: Option<Vec<String>>,
    pub noise_fractions: Vec<f64>,
    pub noise_seeds: Vec<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            protocols: vec![Protocol::ClassMap, Protocol::ClassPrecision],
            classes: Vec::new(),
            k: 5,
            split_seed: 1,
            query_fraction: 0.05,
            retrieval_fraction: 0.5,
            query_ids: None,
            noise_fractions: vec![0.0, 0.1, 0.2, 0.3],
            noise_seeds: vec![1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub pairs: usize,
    pub seed: u64,
    /// Run t-SNE and the canvas layout as well.
    pub tsne: bool,
    pub tsne_params: TsneConfig,
    /// Items projected by t-SNE, taken from the start of the dataset.
    pub max_points: usize,
    pub canvas_px: u32,
    pub thumb_px: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            pairs: 20_000,
            seed: 1,
            tsne: false,
            tsne_params: TsneConfig::default(),
            max_points: 500,
            canvas_px: jointspace::eval::DEFAULT_CANVAS_PX,
            thumb_px: jointspace::eval::DEFAULT_THUMB_PX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    /// Directory of thumbnails named `<id>.<ext>`.
    pub image_root: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            image_root: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub concepts: usize,
    pub docs_per_concept: usize,
    pub feature_dim: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            concepts: 4,
            docs_per_concept: 250,
            feature_dim: 64,
            noise_sigma: 0.1,
            seed: 1,
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path`, or returns the defaults relative to the working
    /// directory when no file is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.captions);
        if let Some(f) = self.data.features.as_mut() {
            fix(f);
        }
        fix(&mut self.artifacts.dir);
        if let Some(r) = self.service.image_root.as_mut() {
            fix(r);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }
}
