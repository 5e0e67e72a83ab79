//! Morph dataset construction: quality filter, bona fide / morph-pool split,
//! key-image pairing, batch morphing, automatic artifact rejection and
//! per-split manifests.

mod artifacts;
mod config;
mod manifest;
mod pairing;
mod quality;
mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use self::artifacts::{auto_reject_artifacts, ArtifactReport, ArtifactThresholds, ArtifactVerdict};
pub use self::config::PipelineConfig;
pub use self::manifest::{
    AttackEntry, AttackStatus, DatasetManifest, ManifestParams, ReviewStamp, Split, StatusCounts, MANIFEST_SCHEMA_VERSION,
};
pub use self::pairing::{select_pairs, split_bf_attack, MorphPair};
pub use self::quality::{filter_by_quality, read_quality_csv, QualityRecord};
pub use self::run::{inspect_pending, load_source, load_source_from, run_pipeline, PipelineOutput};

#[cfg(test)]
pub(crate) use self::manifest::tests as tests_support;

use crate::morph::MorphError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("keep = {keep} exceeds the {available} available records")]
    KeepExceedsInput { keep: usize, available: usize },
    #[error("pool of {pool} cannot supply {n_keys} keys with {partners_per_key} partners each")]
    InsufficientPool {
        pool: usize,
        n_keys: usize,
        partners_per_key: usize,
    },
    #[error("invalid quality record {id:?}: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("mouth landmarks missing: need {needed} points, got {got}")]
    MissingMouthLandmarks { needed: usize, got: usize },
    #[error("manifest inconsistency: {0}")]
    Inconsistent(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage {stage} failed for {} item(s): {}", failures.len(), summarize(failures))]
    Stage { stage: &'static str, failures: Vec<(String, String)> },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Morph(#[from] MorphError),
}

fn summarize(failures: &[(String, String)]) -> String {
    let mut parts: Vec<String> = failures.iter().take(3).map(|(id, e)| format!("{id}: {e}")).collect();
    if failures.len() > 3 {
        parts.push(format!("... {} more", failures.len() - 3));
    }
    parts.join("; ")
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> PipelineError {
    let path = path.into();
    move |source| PipelineError::Io { path, source }
}
