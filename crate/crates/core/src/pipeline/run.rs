use std::collections::HashSet;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;

use super::config::SplitInputs;
use super::{
    auto_reject_artifacts, filter_by_quality, io_err, read_quality_csv, select_pairs, split_bf_attack, ArtifactThresholds,
    ArtifactVerdict, AttackEntry, AttackStatus, DatasetManifest, ManifestParams, MorphPair, PipelineConfig, PipelineError,
    QualityRecord, Split, MANIFEST_SCHEMA_VERSION,
};
use crate::image::Image;
use crate::morph::{LandmarkSet, MorphEngine, MorphError, MorphParams};
use crate::rng::{derive_seed, stream};

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub train: DatasetManifest,
    pub eval: DatasetManifest,
    pub train_path: PathBuf,
    pub eval_path: PathBuf,
}

struct SplitPlan {
    split: Split,
    bonafide: Vec<String>,
    pool: Vec<String>,
    pairs: Vec<MorphPair>,
}

/// Runs filter, split, pairing, morphing and automatic artifact rejection
/// for both splits, then writes one manifest per split. Manifests are only
/// written once both splits have completed every stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;

    let train_records = read_quality_csv(config.inputs(Split::Train).quality)?;
    let eval_records = read_quality_csv(config.inputs(Split::Eval).quality)?;
    check_disjoint(&train_records, &eval_records)?;
    info!("ingest: {} train / {} eval quality records", train_records.len(), eval_records.len());

    let plans = [
        plan_split(config, Split::Train, &train_records)?,
        plan_split(config, Split::Eval, &eval_records)?,
    ];

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;

    let mut manifests = Vec::with_capacity(2);
    for plan in &plans {
        let attacks = pool.install(|| morph_stage(config, plan))?;
        let inputs = config.inputs(plan.split);
        let manifest = DatasetManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            split: plan.split,
            seed: config.seed,
            params: ManifestParams {
                keep: config.keep,
                n_keys: config.n_keys,
                partners_per_key: config.partners_per_key,
                blend: config.blend,
                augment_boundary: config.augment_boundary,
                artifacts: config.thresholds(),
            },
            source_images: inputs.images.display().to_string(),
            source_landmarks: inputs.landmarks.display().to_string(),
            bonafide: plan.bonafide.clone(),
            morph_pool: plan.pool.clone(),
            pairs: plan.pairs.clone(),
            attacks,
        };
        manifest.validate()?;
        let counts = manifest.status_counts();
        info!(
            "{}: {} bona fide, {} pairs, {} pending, {} auto-rejected",
            plan.split.as_str(),
            manifest.bonafide.len(),
            manifest.pairs.len(),
            counts.pending,
            counts.auto_rejected
        );
        manifests.push(manifest);
    }

    let eval = manifests.pop().expect("two manifests");
    let train = manifests.pop().expect("two manifests");
    let train_path = config.manifest_path(Split::Train);
    let eval_path = config.manifest_path(Split::Eval);
    train.save_atomic(&train_path)?;
    eval.save_atomic(&eval_path)?;
    Ok(PipelineOutput {
        train,
        eval,
        train_path,
        eval_path,
    })
}

fn check_disjoint(train: &[QualityRecord], eval: &[QualityRecord]) -> Result<(), PipelineError> {
    let ids: HashSet<&str> = train.iter().map(|r| r.image_id.as_str()).collect();
    match eval.iter().find(|r| ids.contains(r.image_id.as_str())) {
        Some(r) => Err(PipelineError::Inconsistent(format!(
            "image {} appears in both the train and eval pools",
            r.image_id
        ))),
        None => Ok(()),
    }
}

fn plan_split(config: &PipelineConfig, split: Split, records: &[QualityRecord]) -> Result<SplitPlan, PipelineError> {
    let name = split.as_str();
    let kept = filter_by_quality(records, config.keep)?;
    let (bonafide, pool) = split_bf_attack(&kept, &mut stream(config.seed, &format!("{name}/split")));
    let pairs = select_pairs(
        &pool,
        config.n_keys,
        config.partners_per_key,
        &mut stream(config.seed, &format!("{name}/pair")),
        derive_seed(config.seed, &format!("{name}/pair-seed")),
    )?;
    info!(
        "{name}: {} records -> {} kept -> {} bona fide + {} pool -> {} pairs",
        records.len(),
        kept.len(),
        bonafide.len(),
        pool.len(),
        pairs.len()
    );
    Ok(SplitPlan {
        split,
        bonafide,
        pool,
        pairs,
    })
}

/// Loads `{images}/{id}.png` and its landmarks (`{id}.json`, or `{id}.txt`
/// as `x y` lines).
pub fn load_source(inputs: &SplitInputs<'_>, id: &str) -> Result<(Image, LandmarkSet), MorphError> {
    load_source_from(inputs.images, inputs.landmarks, id)
}

pub fn load_source_from(images: &Path, landmarks: &Path, id: &str) -> Result<(Image, LandmarkSet), MorphError> {
    let img = Image::load(images.join(format!("{id}.png")))?;
    let json = landmarks.join(format!("{id}.json"));
    let path = if json.exists() { json } else { landmarks.join(format!("{id}.txt")) };
    let lm = LandmarkSet::load(path, Some(img.dimensions()))?;
    Ok((img, lm))
}

fn morph_stage(config: &PipelineConfig, plan: &SplitPlan) -> Result<Vec<AttackEntry>, PipelineError> {
    let split_dir = config.split_dir(plan.split);
    let morph_dir = split_dir.join("morphs");
    std::fs::create_dir_all(&morph_dir).map_err(io_err(&morph_dir))?;
    let engine = MorphEngine {
        augment_boundary: config.augment_boundary,
    };
    let inputs = config.inputs(plan.split);
    let thresholds = config.thresholds();

    let results: Vec<Result<AttackEntry, (String, String)>> = plan
        .pairs
        .par_iter()
        .enumerate()
        .map(|(i, pair)| {
            let attack_id = format!("{}-ma-{i:05}", plan.split.as_str());
            morph_pair(&engine, &inputs, &morph_dir, &thresholds, config.blend, i, &attack_id, pair)
                .map_err(|e| (pair.pair_id.clone(), e.to_string()))
        })
        .collect();

    let mut attacks = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(a) => attacks.push(a),
            Err(f) => failures.push(f),
        }
    }
    if !failures.is_empty() {
        return Err(PipelineError::Stage { stage: "morph", failures });
    }
    Ok(attacks)
}

/// Re-runs the artifact check on every pending attack with `thresholds`,
/// moving failures to auto-rejected. Returns how many were rejected.
pub fn inspect_pending(
    manifest: &mut DatasetManifest,
    manifest_dir: &Path,
    thresholds: &ArtifactThresholds,
) -> Result<usize, PipelineError> {
    let checks: Vec<(usize, Result<ArtifactVerdict, PipelineError>)> = manifest
        .attacks
        .par_iter()
        .enumerate()
        .filter(|(_, a)| a.status == AttackStatus::Pending)
        .map(|(i, a)| {
            let check = || -> Result<ArtifactVerdict, PipelineError> {
                let img = Image::load(manifest_dir.join(&a.image)).map_err(MorphError::from)?;
                let lm = LandmarkSet::load(manifest_dir.join(&a.landmarks), Some(img.dimensions()))?;
                auto_reject_artifacts(&img, &lm, thresholds)
            };
            (i, check())
        })
        .collect();

    let mut rejected = 0;
    let mut failures = Vec::new();
    for (i, verdict) in checks {
        let entry = &mut manifest.attacks[i];
        match verdict {
            Ok(v) => {
                if let ArtifactVerdict::Reject { reason, .. } = &v {
                    entry.status = AttackStatus::AutoRejected;
                    entry.reject_reason = Some(reason.clone());
                    rejected += 1;
                }
                entry.auto_check = Some(v.report().clone());
            }
            Err(e) => failures.push((entry.attack_id.clone(), e.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(PipelineError::Stage { stage: "inspect", failures });
    }
    manifest.params.artifacts = *thresholds;
    Ok(rejected)
}

#[allow(clippy::too_many_arguments)]
fn morph_pair(
    engine: &MorphEngine,
    inputs: &SplitInputs<'_>,
    morph_dir: &Path,
    thresholds: &ArtifactThresholds,
    blend: f64,
    index: usize,
    attack_id: &str,
    pair: &MorphPair,
) -> Result<AttackEntry, PipelineError> {
    let (img_a, lm_a) = load_source(inputs, &pair.key_id)?;
    let (img_b, lm_b) = load_source(inputs, &pair.partner_id)?;
    let params = MorphParams::new(blend, pair.warp, pair.seed)?;
    let (morphed, target) = engine.morph(&img_a, &lm_a, &img_b, &lm_b, &params)?;

    let image_name = format!("{attack_id}.png");
    let landmark_name = format!("{attack_id}.json");
    morphed.save(morph_dir.join(&image_name)).map_err(MorphError::from)?;
    target.clone().with_image(image_name.clone()).save(morph_dir.join(&landmark_name))?;

    let verdict = auto_reject_artifacts(&morphed, &target, thresholds)?;
    let (status, reject_reason) = match &verdict {
        ArtifactVerdict::Pass { .. } => (AttackStatus::Pending, None),
        ArtifactVerdict::Reject { reason, .. } => (AttackStatus::AutoRejected, Some(reason.clone())),
    };
    Ok(AttackEntry {
        attack_id: attack_id.to_string(),
        pair_id: pair.pair_id.clone(),
        pair_index: index,
        image: format!("morphs/{image_name}"),
        landmarks: format!("morphs/{landmark_name}"),
        status,
        reject_reason,
        auto_check: Some(verdict.report().clone()),
        review: None,
    })
}
