use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, ArtifactThresholds, PipelineError, Split};

/// Flat pipeline configuration, usually read from TOML. Relative paths are
/// resolved against the directory of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub train_images: PathBuf,
    pub train_landmarks: PathBuf,
    pub train_quality: PathBuf,
    pub eval_images: PathBuf,
    pub eval_landmarks: PathBuf,
    pub eval_quality: PathBuf,
    #[serde(default = "defaults::keep")]
    pub keep: usize,
    #[serde(default = "defaults::n_keys")]
    pub n_keys: usize,
    #[serde(default = "defaults::partners_per_key")]
    pub partners_per_key: usize,
    #[serde(default = "defaults::blend")]
    pub blend: f64,
    #[serde(default = "defaults::black_luma")]
    pub black_luma: f64,
    #[serde(default = "defaults::black_fraction")]
    pub black_fraction: f64,
    #[serde(default = "defaults::mouth_dilation")]
    pub mouth_dilation: f64,
    #[serde(default = "defaults::augment_boundary")]
    pub augment_boundary: bool,
    /// Worker threads for the morph stage; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
}

mod defaults {
    pub fn keep() -> usize {
        50_000
    }
    pub fn n_keys() -> usize {
        5_000
    }
    pub fn partners_per_key() -> usize {
        5
    }
    pub fn blend() -> f64 {
        0.5
    }
    pub fn black_luma() -> f64 {
        30.0
    }
    pub fn black_fraction() -> f64 {
        0.10
    }
    pub fn mouth_dilation() -> f64 {
        0.10
    }
    pub fn augment_boundary() -> bool {
        true
    }
}

/// Input locations of one split.
#[derive(Clone, Debug)]
pub struct SplitInputs<'a> {
    pub images: &'a Path,
    pub landmarks: &'a Path,
    pub quality: &'a Path,
}

impl PipelineConfig {
    /// 250 images per split reduced to 50, then 25 bona fide and 5 keys
    /// with 5 partners each. Paths follow the generated corpus layout and
    /// are relative.
    pub fn desk_scale(seed: u64) -> Self {
        Self {
            seed,
            out_dir: "out".into(),
            train_images: "train/images".into(),
            train_landmarks: "train/landmarks".into(),
            train_quality: "train/quality.csv".into(),
            eval_images: "eval/images".into(),
            eval_landmarks: "eval/landmarks".into(),
            eval_quality: "eval/quality.csv".into(),
            keep: 50,
            n_keys: 5,
            partners_per_key: 5,
            blend: defaults::blend(),
            black_luma: defaults::black_luma(),
            black_fraction: defaults::black_fraction(),
            mouth_dilation: defaults::mouth_dilation(),
            augment_boundary: true,
            threads: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a TOML file and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let config = Self::from_toml(&text)?;
        Ok(config.resolved(path.parent().unwrap_or(Path::new("."))))
    }

    /// Copy with every relative path joined onto `base`.
    pub fn resolved(mut self, base: &Path) -> Self {
        for p in [
            &mut self.out_dir,
            &mut self.train_images,
            &mut self.train_landmarks,
            &mut self.train_quality,
            &mut self.eval_images,
            &mut self.eval_landmarks,
            &mut self.eval_quality,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        self
    }

    pub fn thresholds(&self) -> ArtifactThresholds {
        ArtifactThresholds {
            black_luma: self.black_luma,
            black_fraction: self.black_fraction,
            mouth_dilation: self.mouth_dilation,
        }
    }

    pub fn inputs(&self, split: Split) -> SplitInputs<'_> {
        match split {
            Split::Train => SplitInputs {
                images: &self.train_images,
                landmarks: &self.train_landmarks,
                quality: &self.train_quality,
            },
            Split::Eval => SplitInputs {
                images: &self.eval_images,
                landmarks: &self.eval_landmarks,
                quality: &self.eval_quality,
            },
        }
    }

    pub fn split_dir(&self, split: Split) -> PathBuf {
        self.out_dir.join(split.as_str())
    }

    pub fn manifest_path(&self, split: Split) -> PathBuf {
        self.split_dir(split).join("manifest.json")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if !(0.0..=1.0).contains(&self.blend) {
            return bad(format!("blend {} outside [0, 1]", self.blend));
        }
        if !(0.0..=1.0).contains(&self.black_fraction) {
            return bad(format!("black_fraction {} outside [0, 1]", self.black_fraction));
        }
        if !(self.mouth_dilation >= 0.0 && self.mouth_dilation.is_finite()) {
            return bad(format!("mouth_dilation {} must be non-negative", self.mouth_dilation));
        }
        if !self.black_luma.is_finite() {
            return bad("black_luma must be finite".into());
        }
        Ok(())
    }
}
