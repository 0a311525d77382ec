//! Retrieval metrics, evaluation protocols and embedding-space analysis.
//!
//! * [`precision_at_k`] and [`average_precision`] score one ranking.
//! * [`map_tag_protocol`], [`map_class_protocol`] and
//!   [`class_precision_protocol`] train a model on one part of a dataset and
//!   query the image embeddings of another part.
//! * [`noise_sweep`] repeats a protocol while captions are swapped.
//! * [`distance_correlation`] relates text and image pair distances.
//! * [`tsne_project`] and [`canvas_layout`] render a space in two dimensions.

mod canvas;
mod metrics;
mod protocols;
mod report;
mod scatter;
mod tsne;

pub use canvas::{canvas_layout, placements_tsv, ItemKind, Placement, DEFAULT_CANVAS_PX, DEFAULT_THUMB_PX};
pub use metrics::{average_precision, precision_at_k, RelevanceJudgment};
pub use protocols::{
    class_precision_protocol, map_class_protocol, map_tag_protocol, noise_sweep, noise_table_tsv, NoiseRow, Split,
};
pub use report::{EvalReport, QueryScore};
pub use scatter::{distance_correlation, r_squared, PairDistance, ScatterAnalysis};
pub use tsne::{silhouette_score, tsne_project, TsneConfig, TsneResult};
