//! Desk-scale reference detector: Laplacian residual statistics, a linear
//! classifier with a pixel-wise map head, and the combined map + binary
//! cross-entropy loss.

mod dataset;
mod features;
mod loss;
mod model;
mod train;

use std::path::PathBuf;

use thiserror::Error;

pub use self::dataset::{manifest_samples, score_samples, LabeledSample};
pub use self::features::{extract_features, face_input, FeatureConfig, FeatureVector, FEATURE_GRID};
pub use self::loss::{bce, pw_loss, Grid, PwLabel, BCE_EPS};
pub use self::model::{sigmoid, BinaryHead, LinearModel, Logit, MapHead, Standardizer};
pub use self::train::{train, EpochStats, TrainConfig, TrainOutcome, TrainSample};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("grid shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("feature dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training set needs both classes (attack: {attack}, bona fide: {bonafide})")]
    SingleClassTrainingSet { attack: usize, bonafide: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("model was trained with feature config {model}, current is {current}")]
    FeatureConfigMismatch { model: String, current: String },
    #[error("model json in {path}: {source}")]
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
    Morph(#[from] crate::morph::MorphError),
}
