use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use serde::{Deserialize, Serialize};

use morphforge::baseline::{manifest_samples, score_samples, train, BinaryHead, LinearModel, TrainConfig};
use morphforge::metrics::{read_scores_csv, write_roc_csv, MadReport};
use morphforge::morph::{sample_warp_factor, MorphEngine};
use morphforge::pipeline::{
    filter_by_quality, inspect_pending, read_quality_csv, run_pipeline, select_pairs, split_bf_attack, DatasetManifest,
    PipelineConfig,
};
use morphforge::rng::{derive_seed, stream};
use morphforge::synth::{write_corpus, CorpusSpec};
use morphforge::{Image, LandmarkSet, MorphParams};

use crate::{
    Cli, Command, EvalArgs, FilterArgs, HeadArg, InspectArgs, MorphArgs, PairArgs, PipelineArgs, ReviewServeArgs, ScoreArgs,
    SplitArgs, SynthArgs, TrainArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Filter(a) => filter(a),
        Command::Split(a) => split(a),
        Command::Pair(a) => pair(a),
        Command::Morph(a) => morph(a),
        Command::Inspect(a) => inspect(a),
        Command::ReviewServe(a) => review_serve(a),
        Command::TrainBaseline(a) => train_baseline(a),
        Command::Score(a) => score(a),
        Command::Eval(a) => eval(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Synth(a) => synth(a),
    }
}

/// Bona fide / morph-pool split as written by `split`.
#[derive(Debug, Serialize, Deserialize)]
struct SplitFile {
    bonafide: Vec<String>,
    morph_pool: Vec<String>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn filter(a: FilterArgs) -> Result<()> {
    let records = read_quality_csv(&a.quality)?;
    let kept = filter_by_quality(&records, a.keep)?;
    let mut text = kept.join("\n");
    text.push('\n');
    fs::write(&a.out, text).with_context(|| format!("writing {}", a.out.display()))?;
    info!("kept {} of {} records", kept.len(), records.len());
    Ok(())
}

fn split(a: SplitArgs) -> Result<()> {
    let text = fs::read_to_string(&a.ids).with_context(|| format!("reading {}", a.ids.display()))?;
    let ids: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
    let (bonafide, morph_pool) = split_bf_attack(&ids, &mut stream(a.seed, &format!("{}/split", a.label)));
    info!("{} bona fide, {} in morph pool", bonafide.len(), morph_pool.len());
    write_json(&a.out, &SplitFile { bonafide, morph_pool })
}

fn pair(a: PairArgs) -> Result<()> {
    let split: SplitFile = read_json(&a.pool)?;
    let pairs = select_pairs(
        &split.morph_pool,
        a.n_keys,
        a.partners_per_key,
        &mut stream(a.seed, &format!("{}/pair", a.label)),
        derive_seed(a.seed, &format!("{}/pair-seed", a.label)),
    )?;
    info!("{} pairs", pairs.len());
    write_json(&a.out, &pairs)
}

fn morph(a: MorphArgs) -> Result<()> {
    let img_a = Image::load(&a.image_a)?;
    let img_b = Image::load(&a.image_b)?;
    let lm_a = LandmarkSet::load(&a.landmarks_a, Some(img_a.dimensions()))?;
    let lm_b = LandmarkSet::load(&a.landmarks_b, Some(img_b.dimensions()))?;
    let warp = match a.warp {
        Some(w) => w,
        None => sample_warp_factor(&mut stream(a.seed, "morph/warp")),
    };
    let params = MorphParams::new(a.blend, warp, a.seed)?;
    let engine = MorphEngine {
        augment_boundary: !a.no_boundary,
    };
    let (out, target) = engine.morph(&img_a, &lm_a, &img_b, &lm_b, &params)?;
    out.save(&a.out)?;
    let lm_path = a.out_landmarks.unwrap_or_else(|| a.out.with_extension("json"));
    target.save(&lm_path)?;
    info!("blend {} warp {warp:.4} -> {}", a.blend, a.out.display());
    Ok(())
}

fn inspect(a: InspectArgs) -> Result<()> {
    let mut manifest = DatasetManifest::load(&a.manifest)?;
    let mut thresholds = manifest.params.artifacts;
    if let Some(v) = a.black_luma {
        thresholds.black_luma = v;
    }
    if let Some(v) = a.black_fraction {
        thresholds.black_fraction = v;
    }
    if let Some(v) = a.mouth_dilation {
        thresholds.mouth_dilation = v;
    }
    let dir = a.manifest.parent().unwrap_or(Path::new("."));
    let rejected = inspect_pending(&mut manifest, dir, &thresholds)?;
    let c = manifest.status_counts();
    println!(
        "newly auto-rejected {rejected}; pending {} auto_rejected {} accepted {} rejected {}",
        c.pending, c.auto_rejected, c.accepted, c.rejected
    );
    if !a.dry_run {
        manifest.save_atomic(&a.manifest)?;
    }
    Ok(())
}

fn review_serve(a: ReviewServeArgs) -> Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(crate::server::serve(&a.manifest, a.audit_log.as_deref(), a.bind))
}

fn train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => TrainConfig::default(),
    };
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.lr {
        cfg.lr = v;
    }
    if let Some(v) = a.weight_decay {
        cfg.weight_decay = v;
    }
    if let Some(v) = a.max_epochs {
        cfg.max_epochs = v;
    }
    if let Some(v) = a.patience {
        cfg.patience = v;
    }
    if let Some(h) = a.head {
        cfg.head = match h {
            HeadArg::Sigmoid => BinaryHead::Sigmoid,
            HeadArg::Softmax2 => BinaryHead::Softmax2,
        };
    }
    Ok(cfg)
}

fn load_manifest_samples(path: &Path) -> Result<Vec<morphforge::baseline::LabeledSample>> {
    let manifest = DatasetManifest::load(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let samples = manifest_samples(&manifest, dir)?;
    let attacks = samples.iter().filter(|s| s.attack).count();
    info!("{}: {} bona fide, {} attacks", path.display(), samples.len() - attacks, attacks);
    Ok(samples)
}

fn train_baseline(a: TrainArgs) -> Result<()> {
    let cfg = train_config(&a)?;
    let samples = load_manifest_samples(&a.manifest)?;
    let train_set: Vec<_> = samples.iter().map(|s| s.to_train_sample(cfg.map_rows, cfg.map_cols)).collect();
    let outcome = train(&train_set, &cfg)?;
    let best = &outcome.history[outcome.best_epoch - 1];
    info!(
        "{} epochs, best epoch {} (train loss {:.5}, validation loss {:.5})",
        outcome.epochs_run(),
        outcome.best_epoch,
        best.train_loss,
        best.val_loss
    );
    outcome.model.save(&a.out)?;
    Ok(())
}

fn score(a: ScoreArgs) -> Result<()> {
    let model = LinearModel::load(&a.model)?;
    let samples = load_manifest_samples(&a.manifest)?;
    let scores = score_samples(&model, &samples)?;
    morphforge::metrics::write_scores_csv(&a.out, &scores)?;
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let scores = read_scores_csv(&a.scores)?;
    let report = MadReport::compute(&scores)?;
    report.save(&a.out)?;
    if let Some(roc) = &a.roc {
        write_roc_csv(roc, &report.roc)?;
    }
    println!("EER {:.4}% at threshold {}", report.eer, report.eer_threshold);
    for p in &report.bpcer_at_apcer {
        let note = if p.saturated { " (saturated)" } else { "" };
        println!("BPCER @ APCER {}%: {:.4}%{note}", p.target_apcer, p.bpcer);
    }
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<()> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(out) = a.out {
        cfg.out_dir = out;
    }
    if let Some(t) = a.threads {
        cfg.threads = t;
    }
    let out = run_pipeline(&cfg)?;
    for (m, path) in [(&out.train, &out.train_path), (&out.eval, &out.eval_path)] {
        let c = m.status_counts();
        println!(
            "{}: {} bona fide, {} pairs, {} pending, {} auto-rejected -> {}",
            m.split.as_str(),
            m.bonafide.len(),
            m.pairs.len(),
            c.pending,
            c.auto_rejected,
            path.display()
        );
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = CorpusSpec {
        per_split: a.per_split,
        size: a.size,
        seed: a.seed,
        ..CorpusSpec::default()
    };
    let config = write_corpus(&a.out, &spec)?;
    println!("{}", config.display());
    Ok(())
}
