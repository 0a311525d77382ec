use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{sgd_step, RegressorConfig, VisualRegressor};
use crate::corpus::PairDataset;
use crate::error::{Error, Result};
use crate::textemb::TextEmbeddingModel;

/// `N` image features with their `N` target text embeddings.
#[derive(Debug, Clone)]
pub struct TrainingBatch {
    pub features: Array2<f64>,
    pub targets: Array2<f64>,
}

impl TrainingBatch {
    pub fn new(features: Array2<f64>, targets: Array2<f64>) -> Result<Self> {
        if features.nrows() != targets.nrows() {
            return Err(Error::CountMismatch {
                ids: features.nrows(),
                vectors: targets.nrows(),
            });
        }
        Ok(Self { features, targets })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }
}

/// Outcome of a training run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// `(iteration, batch loss)` for every optimisation step.
    pub loss_curve: Vec<(usize, f64)>,
    /// Documents dropped because no caption token could be embedded.
    pub skipped: usize,
}

impl TrainReport {
    /// Mean loss over the first and last `window` recorded steps.
    pub fn endpoints(&self, window: usize) -> Option<(f64, f64)> {
        let n = self.loss_curve.len();
        if n == 0 {
            return None;
        }
        let w = window.clamp(1, n);
        let mean = |s: &[(usize, f64)]| s.iter().map(|x| x.1).sum::<f64>() / s.len() as f64;
        Some((mean(&self.loss_curve[..w]), mean(&self.loss_curve[n - w..])))
    }

    /// Two-column `iteration<TAB>loss` text.
    pub fn loss_curve_tsv(&self) -> String {
        let mut out = String::from("iteration\tloss\n");
        for (it, loss) in &self.loss_curve {
            out.push_str(&format!("{it}\t{loss}\n"));
        }
        out
    }
}

/// Regresses the text embeddings of `ds` captions from their image features.
///
/// Targets are computed once per document with the configured aggregation;
/// documents whose caption has no embeddable token are skipped and counted.
/// Mini-batches are drawn from a seeded shuffle that is reshuffled every
/// pass over the data.
pub fn train_visual(
    ds: &PairDataset,
    text_model: &TextEmbeddingModel,
    cfg: &RegressorConfig,
) -> Result<(VisualRegressor, TrainReport)> {
    if ds.feature_dim() != cfg.input_dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.input_dim,
            actual: ds.feature_dim(),
        });
    }
    if text_model.dim() != cfg.output_dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.output_dim,
            actual: text_model.dim(),
        });
    }
    let mut model = VisualRegressor::new(cfg.clone())?;

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut skipped = 0;
    for (i, doc) in ds.documents.iter().enumerate() {
        match text_model.embed_document(&doc.tokens, cfg.aggregation) {
            Ok(t) => {
                rows.push(i);
                targets.push(t.into_inner());
            }
            Err(Error::AllOutOfVocabulary) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} documents with no embeddable caption token");
    }
    if rows.is_empty() {
        return Err(Error::Evaluation("no document has an embeddable caption".into()));
    }

    let d = cfg.output_dim;
    let f = cfg.input_dim;
    let n = cfg.batch_size.min(rows.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0;
    let mut report = TrainReport {
        skipped,
        ..Default::default()
    };

    for it in 0..cfg.max_iters {
        let mut batch_x = Array2::zeros((n, f));
        let mut batch_t = Array2::zeros((n, d));
        for b in 0..n {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            let k = order[cursor];
            cursor += 1;
            for (j, &x) in ds.feature(rows[k]).iter().enumerate() {
                batch_x[[b, j]] = x as f64;
            }
            for (j, &t) in targets[k].iter().enumerate() {
                batch_t[[b, j]] = t;
            }
        }
        let (loss, grads) = model.loss_and_gradients(batch_x.view(), batch_t.view())?;
        sgd_step(&mut model, &grads, it);
        report.loss_curve.push((it, loss));
    }
    if !model.is_finite() {
        return Err(Error::NonFinite("regressor parameters"));
    }
    Ok((model, report))
}
