use std::path::Path;

use rayon::prelude::*;

use super::features::{extract_features, face_input, FeatureVector};
use super::loss::PwLabel;
use super::model::LinearModel;
use super::train::TrainSample;
use super::BaselineError;
use crate::image::Image;
use crate::metrics::{Label, ScoreSet};
use crate::morph::LandmarkSet;
use crate::pipeline::{load_source_from, AttackStatus, DatasetManifest};

/// One detector input with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub sample_id: String,
    pub attack: bool,
    pub features: FeatureVector,
}

impl LabeledSample {
    pub fn to_train_sample(&self, map_rows: usize, map_cols: usize) -> TrainSample {
        TrainSample {
            features: self.features.clone(),
            label: PwLabel::new(self.attack, map_rows, map_cols),
        }
    }
}

/// Features for every bona fide image and every surviving attack (pending
/// or accepted) of a split manifest.
///
/// Morph paths are relative to `manifest_dir`; source directories are used
/// as recorded in the manifest.
pub fn manifest_samples(manifest: &DatasetManifest, manifest_dir: &Path) -> Result<Vec<LabeledSample>, BaselineError> {
    let images = Path::new(&manifest.source_images);
    let landmarks = Path::new(&manifest.source_landmarks);
    let mut jobs: Vec<(String, bool)> = manifest.bonafide.iter().map(|id| (id.clone(), false)).collect();
    jobs.extend(
        manifest
            .attacks
            .iter()
            .filter(|a| matches!(a.status, AttackStatus::Pending | AttackStatus::Accepted))
            .map(|a| (a.attack_id.clone(), true)),
    );

    jobs.par_iter()
        .map(|(id, attack)| {
            let (img, lm) = if *attack {
                let entry = manifest.attack(id).expect("listed attack");
                let img = Image::load(manifest_dir.join(&entry.image)).map_err(crate::morph::MorphError::from)?;
                let lm = LandmarkSet::load(manifest_dir.join(&entry.landmarks), Some(img.dimensions()))?;
                (img, lm)
            } else {
                load_source_from(images, landmarks, id)?
            };
            Ok(LabeledSample {
                sample_id: id.clone(),
                attack: *attack,
                features: extract_features(&face_input(&img, &lm)?),
            })
        })
        .collect()
}

/// Scores samples into the evaluation format.
pub fn score_samples(model: &LinearModel, samples: &[LabeledSample]) -> Result<ScoreSet, BaselineError> {
    let mut set = ScoreSet::default();
    for s in samples {
        let label = if s.attack { Label::Attack } else { Label::Bonafide };
        set.push(s.sample_id.clone(), label, model.score(&s.features)?);
    }
    Ok(set)
}
