//! Loaded artifacts and query resolution shared by `query` and `serve`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use anyhow::{ensure, Context};
use jointspace::corpus::{load_pairs, tokenize};
use jointspace::pipeline::{JointEmbedder, JointModel};
use jointspace::regressor::{read_regressor, write_regressor, VisualRegressor};
use jointspace::retrieval::{compose_query, read_index, search, write_index, EmbeddingIndex, RankedResult};
use jointspace::textemb::{read_model, write_model, TextEmbeddingModel};
use jointspace::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;

fn one() -> f64 {
    1.0
}

/// One signed query term as sent by clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Term {
    Text {
        value: String,
        #[serde(default = "one")]
        weight: f64,
    },
    ImageId {
        value: String,
        #[serde(default = "one")]
        weight: f64,
    },
    Vector {
        value: Vec<f64>,
        #[serde(default = "one")]
        weight: f64,
    },
}

/// Everything needed to answer queries. Immutable once built.
#[derive(Debug)]
pub struct ServiceSnapshot {
    pub text: TextEmbeddingModel,
    pub visual: VisualRegressor,
    pub index: EmbeddingIndex,
    /// Tags of indexed items, when the caption file was available.
    pub tags: HashMap<String, Vec<String>>,
}

impl ServiceSnapshot {
    pub fn new(
        text: TextEmbeddingModel,
        visual: VisualRegressor,
        index: EmbeddingIndex,
        tags: HashMap<String, Vec<String>>,
    ) -> anyhow::Result<Self> {
        ensure!(
            text.dim() == visual.output_dim() && visual.output_dim() == index.dim(),
            "artifact dimensions disagree: text {}, visual {}, index {}",
            text.dim(),
            visual.output_dim(),
            index.dim()
        );
        Ok(Self {
            text,
            visual,
            index,
            tags,
        })
    }

    /// Loads the text model, regressor and index named by `cfg`.
    pub fn load(cfg: &PipelineConfig) -> anyhow::Result<Self> {
        let a = &cfg.artifacts;
        let text = load_text(&a.text_model())?;
        let visual = load_visual(&a.visual_model())?;
        let index = load_index(&a.index())?;
        let tags = match load_pairs(&cfg.data.captions, cfg.data.features.as_deref()) {
            Ok(ds) => ds
                .documents
                .into_iter()
                .map(|d| (d.id, d.tags.into_iter().collect()))
                .collect(),
            Err(e) => {
                log::warn!("no item tags available: {e}");
                HashMap::new()
            }
        };
        Self::new(text, visual, index, tags)
    }

    pub fn model(&self) -> JointModel<'_> {
        JointModel {
            text: &self.text,
            visual: &self.visual,
        }
    }

    pub fn tags_of(&self, id: &str) -> &[String] {
        self.tags.get(id).map_or(&[], Vec::as_slice)
    }

    /// Composed query vector of `terms`.
    pub fn resolve(&self, terms: &[Term]) -> Result<Vec<f64>> {
        let mut vectors = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Term::Text { value, weight } => {
                    vectors.push((self.model().embed_text(&tokenize(value))?, *weight));
                }
                Term::ImageId { value, weight } => vectors.push((self.index.vector(value)?, *weight)),
                Term::Vector { value, weight } => vectors.push((value.clone(), *weight)),
            }
        }
        let refs: Vec<(&[f64], f64)> = vectors.iter().map(|(v, w)| (v.as_slice(), *w)).collect();
        compose_query(&refs)
    }

    pub fn query(&self, terms: &[Term], k: usize) -> Result<RankedResult> {
        let q = self.resolve(terms)?;
        search(&self.index, &q, k)
    }
}

pub fn load_text(path: &Path) -> anyhow::Result<TextEmbeddingModel> {
    let f = File::open(path).with_context(|| format!("opening text model {}", path.display()))?;
    read_model(&mut BufReader::new(f)).with_context(|| format!("reading text model {}", path.display()))
}

pub fn load_visual(path: &Path) -> anyhow::Result<VisualRegressor> {
    let f = File::open(path).with_context(|| format!("opening visual model {}", path.display()))?;
    read_regressor(&mut BufReader::new(f)).with_context(|| format!("reading visual model {}", path.display()))
}

pub fn load_index(path: &Path) -> anyhow::Result<EmbeddingIndex> {
    let f = File::open(path).with_context(|| format!("opening index {}", path.display()))?;
    read_index(&mut BufReader::new(f)).with_context(|| format!("reading index {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn save_text(path: &Path, m: &TextEmbeddingModel) -> anyhow::Result<()> {
    write_model(&mut create(path)?, m)?;
    Ok(())
}

pub fn save_visual(path: &Path, m: &VisualRegressor) -> anyhow::Result<()> {
    write_regressor(&mut create(path)?, m)?;
    Ok(())
}

pub fn save_index(path: &Path, index: &EmbeddingIndex) -> anyhow::Result<()> {
    write_index(&mut create(path)?, index)?;
    Ok(())
}

pub fn save_string(path: &Path, text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    create(path)?.write_all(text.as_bytes())?;
    Ok(())
}

/// True when `e` names an id that does not exist.
pub fn is_not_found(e: &Error) -> bool {
    matches!(e, Error::UnknownId(_))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_parse_with_default_weight() {
        let t: Vec<Term> = serde_json::from_str(
            r#"[{"type":"text","value":"snow"},{"type":"image_id","value":"s1","weight":-1},{"type":"vector","value":[1,0]}]"#,
        )
        .unwrap();
        assert_eq!(
            t[0],
            Term::Text {
                value: "snow".into(),
                weight: 1.0
            }
        );
        assert!(matches!(t[1], Term::ImageId { weight, .. } if weight == -1.0));
        assert!(matches!(&t[2], Term::Vector { value, .. } if value == &[1.0, 0.0]));
        assert!(serde_json::from_str::<Term>(r#"{"type":"audio","value":"x"}"#).is_err());
    }
}
