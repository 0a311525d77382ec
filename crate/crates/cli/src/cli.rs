//! Argument parsing and subcommand implementations.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use jointspace::corpus::{generate_synthetic, load_pairs, Corpus, PairDataset, SyntheticConfig};
use jointspace::eval::{
    canvas_layout, class_precision_protocol, distance_correlation, map_class_protocol, map_tag_protocol, noise_sweep,
    noise_table_tsv, placements_tsv, tsne_project, ItemKind, Split,
};
use jointspace::pipeline::{index_images, JointEmbedder, JointModel, PipelineSpec};
use jointspace::regressor::{train_visual, RegressorConfig};
use jointspace::textemb::Method;

use crate::config::{PipelineConfig, Protocol};
use crate::snapshot::{self, ServiceSnapshot, Term};

#[derive(Debug, Parser)]
#[command(
    name = "jointspace",
    version,
    about = "Train, query and evaluate joint text-image embeddings"
)]
pub struct Cli {
    /// Pipeline configuration file.
    #[arg(long, global = true, env = "JOINTSPACE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Overrides the artifact directory.
    #[arg(long, global = true)]
    pub artifacts: Option<PathBuf>,
    /// Overrides the caption file.
    #[arg(long, global = true)]
    pub captions: Option<PathBuf>,
    /// Overrides the feature sidecar.
    #[arg(long, global = true)]
    pub features: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic concept dataset to the configured data paths.
    Synth(SynthArgs),
    /// Train the text embedding model on the captions.
    TrainText(TrainTextArgs),
    /// Train the visual regressor against the text model.
    TrainVisual(TrainVisualArgs),
    /// Embed every dataset image and write the search index.
    BuildIndex,
    /// Search the index with weighted text and image terms.
    Query(QueryArgs),
    /// Run the configured evaluation protocols.
    Eval(EvalArgs),
    /// Text/image distance correlation and optional t-SNE layout.
    Analyze(AnalyzeArgs),
    /// Serve the HTTP query API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub concepts: Option<usize>,
    #[arg(long)]
    pub docs_per_concept: Option<usize>,
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainTextArgs {
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub min_count: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainVisualArgs {
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Text term with weight +1 (repeatable).
    #[arg(long)]
    pub text: Vec<String>,
    /// Text term with weight -1 (repeatable).
    #[arg(long)]
    pub neg: Vec<String>,
    /// Indexed image with weight +1 (repeatable).
    #[arg(long)]
    pub image_id: Vec<String>,
    /// Indexed image with weight -1 (repeatable).
    #[arg(long)]
    pub neg_image_id: Vec<String>,
    #[arg(short, default_value_t = 10)]
    pub k: usize,
    /// Print the service's JSON response body instead of a table.
    #[arg(long)]
    pub json: bool,
}

impl QueryArgs {
    pub fn terms(&self) -> Vec<Term> {
        let text = |v: &String, w| Term::Text {
            value: v.clone(),
            weight: w,
        };
        let image = |v: &String, w| Term::ImageId {
            value: v.clone(),
            weight: w,
        };
        self.text
            .iter()
            .map(|v| text(v, 1.0))
            .chain(self.neg.iter().map(|v| text(v, -1.0)))
            .chain(self.image_id.iter().map(|v| image(v, 1.0)))
            .chain(self.neg_image_id.iter().map(|v| image(v, -1.0)))
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Protocols to run instead of the configured ones (repeatable).
    #[arg(long, value_enum)]
    pub protocol: Vec<Protocol>,
    #[arg(short)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Also project with t-SNE and lay the result out on a canvas.
    #[arg(long)]
    pub tsne: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bind: Option<String>,
    #[arg(long)]
    pub image_root: Option<PathBuf>,
}

impl Cli {
    /// Configuration file plus the global overrides.
    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::load(self.config.as_deref())?;
        if let Some(a) = &self.artifacts {
            cfg.artifacts.dir = a.clone();
        }
        if let Some(c) = &self.captions {
            cfg.data.captions = c.clone();
        }
        if let Some(f) = &self.features {
            cfg.data.features = Some(f.clone());
        }
        Ok(cfg)
    }
}

/// Parses `args` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let mut cfg = cli.pipeline_config()?;
    match &cli.command {
        Command::Synth(a) => synth(&mut cfg, a, out),
        Command::TrainText(a) => train_text(&mut cfg, a, out),
        Command::TrainVisual(a) => train_visual_cmd(&mut cfg, a, out),
        Command::BuildIndex => build_index(&cfg, out),
        Command::Query(a) => query(&cfg, a, out),
        Command::Eval(a) => eval(&mut cfg, a, out),
        Command::Analyze(a) => analyze(&mut cfg, a, out),
        Command::Serve(a) => {
            if let Some(b) = &a.bind {
                cfg.service.bind = b.clone();
            }
            if let Some(r) = &a.image_root {
                cfg.service.image_root = Some(r.clone());
            }
            crate::service::serve_blocking(cfg)
        }
    }
}

fn load_dataset(cfg: &PipelineConfig) -> Result<PairDataset> {
    load_pairs(&cfg.data.captions, cfg.data.features.as_deref())
        .with_context(|| format!("loading dataset {}", cfg.data.captions.display()))
}

fn synth(cfg: &mut PipelineConfig, a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let s = &mut cfg.synth;
    s.concepts = a.concepts.unwrap_or(s.concepts);
    s.docs_per_concept = a.docs_per_concept.unwrap_or(s.docs_per_concept);
    s.feature_dim = a.feature_dim.unwrap_or(s.feature_dim);
    s.noise_sigma = a.sigma.unwrap_or(s.noise_sigma);
    s.seed = a.seed.unwrap_or(s.seed);
    let ds = generate_synthetic(&SyntheticConfig::new(
        s.concepts,
        s.docs_per_concept,
        s.feature_dim,
        s.noise_sigma,
        s.seed,
    ))?;
    let Some(features) = cfg.data.features.clone() else {
        bail!("synth needs a feature sidecar path (data.features or --features)");
    };
    for p in [&cfg.data.captions, &features] {
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    ds.write_captions(&cfg.data.captions)?;
    ds.write_features(&features)?;
    writeln!(
        out,
        "wrote {} pairs ({} concepts, feature dim {}) to {}",
        ds.len(),
        s.concepts,
        s.feature_dim,
        cfg.data.captions.display()
    )?;
    Ok(())
}

fn train_text(cfg: &mut PipelineConfig, a: &TrainTextArgs, out: &mut dyn Write) -> Result<()> {
    if a.method.is_some() || a.dim.is_some() {
        let method = a.method.unwrap_or(cfg.text.method());
        let dim = a.dim.unwrap_or(cfg.text.dim());
        let seed = cfg.text.seed();
        cfg.text = if method == cfg.text.method() {
            let mut t = cfg.text.clone();
            t.set_dim(dim);
            t
        } else {
            jointspace::textemb::TextConfig::with_defaults(method, dim, seed)
        };
    }
    if let Some(seed) = a.seed {
        cfg.text.set_seed(seed);
    }
    let min_count = a.min_count.unwrap_or(cfg.data.min_count);
    let ds = load_dataset(cfg)?;
    let corpus = Corpus::from_dataset(&ds, min_count)?;
    let model = cfg.text.train(&corpus)?;
    let path = cfg.artifacts.text_model();
    snapshot::save_text(&path, &model)?;
    writeln!(
        out,
        "trained {} (dim {}, vocabulary {}) -> {}",
        model.method(),
        model.dim(),
        model.vocab().len(),
        path.display()
    )?;
    Ok(())
}

fn train_visual_cmd(cfg: &mut PipelineConfig, a: &TrainVisualArgs, out: &mut dyn Write) -> Result<()> {
    let ds = load_dataset(cfg)?;
    let text = snapshot::load_text(&cfg.artifacts.text_model())?;
    let rc = RegressorConfig {
        input_dim: ds.feature_dim(),
        output_dim: text.dim(),
        max_iters: a.max_iters.unwrap_or(cfg.regressor.max_iters),
        seed: a.seed.unwrap_or(cfg.regressor.seed),
        ..cfg.regressor.clone()
    };
    let (model, report) = train_visual(&ds, &text, &rc)?;
    snapshot::save_visual(&cfg.artifacts.visual_model(), &model)?;
    snapshot::save_string(&cfg.artifacts.loss_curve(), &report.loss_curve_tsv())?;
    if let Some((first, last)) = report.endpoints(20) {
        writeln!(
            out,
            "loss {first:.6} -> {last:.6} over {} iterations",
            report.loss_curve.len()
        )?;
    }
    if report.skipped > 0 {
        writeln!(out, "skipped {} captions without known words", report.skipped)?;
    }
    writeln!(out, "wrote {}", cfg.artifacts.visual_model().display())?;
    Ok(())
}

fn build_index(cfg: &PipelineConfig, out: &mut dyn Write) -> Result<()> {
    let ds = load_dataset(cfg)?;
    let text = snapshot::load_text(&cfg.artifacts.text_model())?;
    let visual = snapshot::load_visual(&cfg.artifacts.visual_model())?;
    let index = index_images(
        &JointModel {
            text: &text,
            visual: &visual,
        },
        &ds,
    )?;
    snapshot::save_index(&cfg.artifacts.index(), &index)?;
    writeln!(
        out,
        "indexed {} images (dim {}) -> {}",
        index.len(),
        index.dim(),
        cfg.artifacts.index().display()
    )?;
    Ok(())
}

fn query(cfg: &PipelineConfig, a: &QueryArgs, out: &mut dyn Write) -> Result<()> {
    let terms = a.terms();
    if terms.is_empty() {
        bail!("give at least one --text, --neg, --image-id or --neg-image-id term");
    }
    let snap = ServiceSnapshot::load(cfg)?;
    let ranked = snap.query(&terms, a.k)?;
    if a.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&crate::service::results_body(&snap, &ranked))?
        )?;
    } else {
        for (rank, (id, score)) in ranked.hits.iter().enumerate() {
            writeln!(out, "{}\t{id}\t{score:.6}\t{}", rank + 1, snap.tags_of(id).join(","))?;
        }
    }
    Ok(())
}

fn classes(cfg: &PipelineConfig, ds: &PairDataset) -> Vec<String> {
    if cfg.eval.classes.is_empty() {
        let all: BTreeSet<&String> = ds.documents.iter().flat_map(|d| &d.tags).collect();
        all.into_iter().cloned().collect()
    } else {
        cfg.eval.classes.clone()
    }
}

fn spec(cfg: &PipelineConfig) -> PipelineSpec {
    PipelineSpec {
        text: cfg.text.clone(),
        min_count: cfg.data.min_count,
        regressor: cfg.regressor.clone(),
    }
}

fn eval(cfg: &mut PipelineConfig, a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    if !a.protocol.is_empty() {
        cfg.eval.protocols = a.protocol.clone();
    }
    if let Some(k) = a.k {
        cfg.eval.k = k;
    }
    let e = cfg.eval.clone();
    let ds = load_dataset(cfg)?;
    let classes = classes(cfg, &ds);
    let spec = spec(cfg);
    let dir = cfg.artifacts.eval_dir();
    let class_split = Split::Random {
        fraction: e.retrieval_fraction,
        seed: e.split_seed,
    };
    for protocol in &e.protocols {
        let (name, json, tsv, summary) = match protocol {
            Protocol::ClassMap => {
                let r = map_class_protocol(&ds, &classes, |d| spec.train(d), &class_split)?;
                ("class_map", r.to_json(), r.to_tsv(), format!("MAP {:.4}", r.aggregate))
            }
            Protocol::ClassPrecision => {
                let r = class_precision_protocol(&ds, &classes, |d| spec.train(d), &class_split, e.k)?;
                (
                    "class_precision",
                    r.to_json(),
                    r.to_tsv(),
                    format!("mean P@{} {:.4}", e.k, r.aggregate),
                )
            }
            Protocol::TagMap => {
                let split = match &e.query_ids {
                    Some(ids) => Split::Explicit(ids.clone()),
                    None => Split::Random {
                        fraction: e.query_fraction,
                        seed: e.split_seed,
                    },
                };
                let r = map_tag_protocol(&ds, |d| spec.train(d), &split)?;
                ("tag_map", r.to_json(), r.to_tsv(), format!("MAP {:.4}", r.aggregate))
            }
            Protocol::NoiseSweep => {
                let rows = noise_sweep(&ds, &e.noise_fractions, &spec, &classes, &e.noise_seeds, e.k)?;
                let summary = rows
                    .iter()
                    .map(|r| format!("{}%: {:.4}", (r.fraction * 100.0).round(), r.mean_precision))
                    .collect::<Vec<_>>()
                    .join(", ");
                (
                    "noise_sweep",
                    serde_json::to_string_pretty(&rows)?,
                    noise_table_tsv(&rows, e.k),
                    summary,
                )
            }
        };
        snapshot::save_string(&dir.join(format!("{name}.json")), &json)?;
        snapshot::save_string(&dir.join(format!("{name}.tsv")), &tsv)?;
        writeln!(out, "{name}\t{summary}")?;
    }
    Ok(())
}

fn analyze(cfg: &mut PipelineConfig, a: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let pairs = a.pairs.unwrap_or(cfg.analysis.pairs);
    let ds = load_dataset(cfg)?;
    let text = snapshot::load_text(&cfg.artifacts.text_model())?;
    let visual = snapshot::load_visual(&cfg.artifacts.visual_model())?;
    let model = JointModel {
        text: &text,
        visual: &visual,
    };

    let mut text_vecs = Vec::new();
    let mut image_vecs = Vec::new();
    let mut tags = Vec::new();
    let mut ids = Vec::new();
    for (i, d) in ds.documents.iter().enumerate() {
        match model.embed_text(&d.tokens) {
            Ok(t) => {
                text_vecs.push(t);
                image_vecs.push(model.embed_image(ds.feature(i))?);
                tags.push(d.tags.clone());
                ids.push(d.id.clone());
            }
            Err(jointspace::Error::AllOutOfVocabulary) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    let scatter = distance_correlation(pairs, &text_vecs, &image_vecs, &tags, cfg.analysis.seed)?;
    let dir = cfg.artifacts.analysis_dir();
    snapshot::save_string(&dir.join("scatter.json"), &scatter.to_json())?;
    snapshot::save_string(&dir.join("scatter.tsv"), &scatter.to_tsv())?;
    writeln!(out, "R^2 {:.6} over {} pairs", scatter.r_squared, scatter.pairs.len())?;
    writeln!(out, "shared-tag bands 0/1/2/3/>3: {:?}", scatter.band_counts())?;

    if a.tsne || cfg.analysis.tsne {
        let n = image_vecs.len().min(cfg.analysis.max_points);
        let mut points: Vec<Vec<f64>> = image_vecs[..n].to_vec();
        let mut labels: Vec<String> = ids[..n].to_vec();
        let mut kinds = vec![ItemKind::Photo; n];
        for class in classes(cfg, &ds) {
            if let Ok(v) = model.embed_text(&jointspace::corpus::tokenize(&class)) {
                points.push(v);
                labels.push(format!("word:{class}"));
                kinds.push(ItemKind::Word);
            }
        }
        let result = tsne_project(&points, &cfg.analysis.tsne_params)?;
        let placements = canvas_layout(&result.coords, &kinds, cfg.analysis.canvas_px, cfg.analysis.thumb_px)?;
        snapshot::save_string(&dir.join("tsne.tsv"), &result.to_tsv())?;
        snapshot::save_string(&dir.join("canvas.tsv"), &placements_tsv(&placements, &labels))?;
        writeln!(
            out,
            "t-SNE of {} points: KL {:.4}, {} of {} thumbnails placed",
            points.len(),
            result.final_kl,
            placements.iter().filter(|p| p.kept).count(),
            placements.len()
        )?;
    }
    Ok(())
}
