//! Baseline detector: feature contrast, loss and gradient checks, training
//! behaviour on constructed fixtures.

use morphforge::baseline::{
    bce, extract_features, pw_loss, train, BinaryHead, FeatureVector, Grid, LinearModel, PwLabel, TrainConfig,
    TrainSample,
};
use morphforge::Image;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian_blur(img: &Image) -> Image {
    let k = [1.0, 4.0, 6.0, 4.0, 1.0];
    let (w, h) = img.dimensions();
    let px = |x: isize, y: isize| f64::from(img.get(x.clamp(0, w as isize - 1) as usize, y.clamp(0, h as isize - 1) as usize, 0));
    Image::from_fn(w, h, 1, |x, y, _| {
        let mut acc = 0.0;
        for (dy, ky) in k.iter().enumerate() {
            for (dx, kx) in k.iter().enumerate() {
                acc += kx * ky * px(x as isize + dx as isize - 2, y as isize + dy as isize - 2);
            }
        }
        (acc / 256.0).round() as u8
    })
    .unwrap()
}

#[test]
fn sharp_checkerboard_has_larger_residual_variance_everywhere() {
    let sharp = Image::from_fn(224, 224, 1, |x, y, _| if (x / 3 + y / 3) % 2 == 0 { 220 } else { 30 }).unwrap();
    let blurred = gaussian_blur(&sharp);
    let (fs, fb) = (extract_features(&sharp), extract_features(&blurred));
    for block in 0..64 {
        let (vs, vb) = (fs.values[2 * block + 1], fb.values[2 * block + 1]);
        assert!(vs > vb, "block {block}: {vs} <= {vb}");
    }
}

#[test]
fn pw_loss_matches_scalar_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..20 {
        let attack = rng.gen_bool(0.5);
        let label = PwLabel::new(attack, 4, 4);
        let pred = Grid {
            rows: 4,
            cols: 4,
            values: (0..16).map(|_| rng.gen_range(0.01..0.99)).collect(),
        };
        let b: f64 = rng.gen_range(0.01..0.99);
        let y = if attack { 1.0 } else { 0.0 };
        let mut total = 0.0;
        for &p in &pred.values {
            total += if attack { -p.ln() } else { -(1.0 - p).ln() };
        }
        let expected = total / 16.0 + -(y * b.ln() + (1.0 - y) * (1.0 - b).ln());
        let got = pw_loss(&pred, &label.map, b, y).unwrap();
        assert!((got - expected).abs() <= 1e-12, "{got} vs {expected}");
    }
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    for head in [BinaryHead::Sigmoid, BinaryHead::Softmax2] {
        for _ in 0..5 {
            let mut model = LinearModel::zeros(6, head, 3, 3);
            let params: Vec<f64> = (0..model.param_count()).map(|_| rng.gen_range(-0.8..0.8)).collect();
            model.set_params(&params);
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let label = PwLabel::new(rng.gen_bool(0.5), 3, 3);
            let (_, grad) = model.loss_and_grad(&x, &label).unwrap();

            for k in 0..params.len() {
                let mut probe = model.clone();
                let mut p = params.clone();
                p[k] += h;
                probe.set_params(&p);
                let up = probe.loss(&x, &label).unwrap();
                p[k] -= 2.0 * h;
                probe.set_params(&p);
                let down = probe.loss(&x, &label).unwrap();
                let numeric = (up - down) / (2.0 * h);
                let scale = grad[k].abs().max(numeric.abs());
                if scale > 1e-7 {
                    let rel = (grad[k] - numeric).abs() / scale;
                    assert!(rel <= 1e-4, "{head:?} param {k}: analytic {} numeric {numeric}", grad[k]);
                }
            }
        }
    }
}

fn separable(n: usize, seed: u64) -> Vec<TrainSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let attack = i % 2 == 0;
            let (x, y): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            // margin around the line x + 2y = 1
            let offset = rng.gen_range(0.3..2.0) * if attack { 1.0 } else { -1.0 };
            let shift = (1.0 - x - 2.0 * y + offset * 5f64.sqrt()) / 5.0;
            TrainSample {
                features: FeatureVector {
                    values: vec![x + shift, y + 2.0 * shift],
                },
                label: PwLabel::new(attack, 2, 2),
            }
        })
        .collect()
}

fn toy_cfg(head: BinaryHead) -> TrainConfig {
    TrainConfig {
        max_epochs: 200,
        val_fraction: 0.2,
        head,
        map_rows: 2,
        map_cols: 2,
        ..TrainConfig::default()
    }
}

#[test]
fn separable_toy_reaches_full_training_accuracy() {
    let samples = separable(60, 9);
    for head in [BinaryHead::Sigmoid, BinaryHead::Softmax2] {
        let out = train(&samples, &toy_cfg(head)).unwrap();
        assert!(out.epochs_run() <= 200);
        let mut attack_min = f64::INFINITY;
        let mut bonafide_max = f64::NEG_INFINITY;
        for &i in &out.train_indices {
            let s = out.model.score(&samples[i].features).unwrap();
            assert_eq!(s > 0.5, samples[i].label.is_attack(), "{head:?} sample {i}: {s}");
            if samples[i].label.is_attack() {
                attack_min = attack_min.min(s);
            } else {
                bonafide_max = bonafide_max.max(s);
            }
        }
        assert!(attack_min > bonafide_max);
    }
}

#[test]
fn training_is_deterministic_per_seed() {
    let samples = separable(40, 2);
    let a = train(&samples, &toy_cfg(BinaryHead::Sigmoid)).unwrap();
    let b = train(&samples, &toy_cfg(BinaryHead::Sigmoid)).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.history, b.history);
    let c = train(&samples, &TrainConfig { seed: 99, ..toy_cfg(BinaryHead::Sigmoid) }).unwrap();
    assert_ne!(a.val_indices, c.val_indices);
}

#[test]
fn early_stopping_returns_best_snapshot() {
    let samples = separable(40, 3);
    let cfg = TrainConfig { patience: 3, lr: 0.5, max_epochs: 500, ..toy_cfg(BinaryHead::Sigmoid) };
    let out = train(&samples, &cfg).unwrap();
    let best = out.history.iter().map(|h| h.val_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(out.history[out.best_epoch - 1].val_loss, best);
    if out.epochs_run() < cfg.max_epochs {
        assert_eq!(out.epochs_run() - out.best_epoch, cfg.patience);
    }
}

proptest! {
    #[test]
    fn loss_is_nonnegative_and_zero_only_at_labels(attack in any::<bool>(), p in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let label = PwLabel::new(attack, 2, 2);
        let y = label.binary;
        let loss = pw_loss(&Grid::filled(2, 2, p), &label.map, b, y).unwrap();
        prop_assert!(loss >= 0.0);
        prop_assert!(bce(p, y) >= 0.0);
        if (p - y).abs() < 1e-12 && (b - y).abs() < 1e-12 {
            prop_assert!(loss <= 1e-6);
        } else if (p - y).abs() > 1e-3 || (b - y).abs() > 1e-3 {
            prop_assert!(loss > 1e-4);
        }
    }
}
