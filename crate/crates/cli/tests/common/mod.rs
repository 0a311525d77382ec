#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_jointspace"));
    c.env_remove("JOINTSPACE_CONFIG");
    c
}

/// Writes a desk-scale pipeline configuration into `dir`.
pub fn write_config(dir: &Path, docs_per_concept: usize) -> PathBuf {
    let path = dir.join("pipeline.toml");
    std::fs::write(
        &path,
        format!(
            r#"
[data]
captions = "data/captions.jsonl"
features = "data/features.bin"

[text]
method = "word2vec"
dim = 32

[synth]
concepts = 4
docs_per_concept = {docs_per_concept}
feature_dim = 64
noise_sigma = 0.1

[eval]
protocols = ["class_precision"]

[analysis]
pairs = 2000
max_points = 120

[analysis.tsne_params]
perplexity = 10.0
iterations = 400
"#
        ),
    )
    .unwrap();
    path
}

pub fn run(config: &Path, args: &[&str]) -> Output {
    bin().arg("--config").arg(config).args(args).output().unwrap()
}

pub fn ok(config: &Path, args: &[&str]) -> String {
    let out = run(config, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stderr),
        String::from_utf8_lossy(&out.stdout)
    );
    String::from_utf8(out.stdout).unwrap()
}
