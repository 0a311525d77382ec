//! Command-line workflow and HTTP query service for `jointspace`.
//!
//! `jointspace synth | train-text | train-visual | build-index | query |
//! eval | analyze | serve` read a TOML [`config::PipelineConfig`] (path from
//! `--config` or `JOINTSPACE_CONFIG`) and write their artifacts under the
//! configured artifact directory.

pub mod cli;
pub mod config;
pub mod service;
pub mod snapshot;

pub use cli::run;
