use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use super::loss::PwLabel;
use super::model::{BinaryHead, LinearModel, Standardizer};
use super::BaselineError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// L2 penalty added to the gradient of every parameter.
    pub weight_decay: f64,
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    pub batch_size: usize,
    pub val_fraction: f64,
    pub seed: u64,
    pub head: BinaryHead,
    pub map_rows: usize,
    pub map_cols: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            weight_decay: 1e-5,
            max_epochs: 1000,
            patience: 20,
            batch_size: 8,
            val_fraction: 0.2,
            seed: 0,
            head: BinaryHead::Sigmoid,
            map_rows: 14,
            map_cols: 14,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSample {
    pub features: FeatureVector,
    pub label: PwLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Snapshot with the lowest validation loss.
    pub model: LinearModel,
    pub best_epoch: usize,
    pub history: Vec<EpochStats>,
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
}

impl TrainOutcome {
    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }
}

/// Adam on the combined map + binary loss with early stopping on a
/// stratified held-out split.
pub fn train(samples: &[TrainSample], cfg: &TrainConfig) -> Result<TrainOutcome, BaselineError> {
    validate(samples, cfg)?;
    let dim = samples[0].features.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (train_idx, val_idx) = stratified_split(samples, cfg.val_fraction, &mut rng);
    // tiny sets with no held-out sample validate on the training split
    let val_idx = if val_idx.is_empty() { train_idx.clone() } else { val_idx };

    let mut model = LinearModel::zeros(dim, cfg.head, cfg.map_rows, cfg.map_cols);
    model.standardizer = Standardizer::fit(train_idx.iter().map(|&i| &samples[i].features), dim);
    let standardized: Vec<Vec<f64>> = samples.iter().map(|s| model.standardizer.apply(&s.features.values)).collect();

    let n_params = model.param_count();
    let mut params = model.params();
    let (mut m, mut v) = (vec![0.0; n_params], vec![0.0; n_params]);
    let mut step = 0i32;

    let mut best = (f64::INFINITY, model.clone(), 0usize);
    let mut since_best = 0usize;
    let mut history = Vec::new();
    let mut order = train_idx.clone();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut train_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = vec![0.0; n_params];
            for &i in batch {
                let (loss, g) = model.loss_and_grad(&standardized[i], &samples[i].label)?;
                train_loss += loss;
                for (acc, gi) in grad.iter_mut().zip(g) {
                    *acc += gi / batch.len() as f64;
                }
            }
            step += 1;
            let (c1, c2) = (1.0 - cfg.beta1.powi(step), 1.0 - cfg.beta2.powi(step));
            for k in 0..n_params {
                let g = grad[k] + cfg.weight_decay * params[k];
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
                params[k] -= cfg.lr * (m[k] / c1) / ((v[k] / c2).sqrt() + cfg.adam_eps);
            }
            model.set_params(&params);
        }
        train_loss /= order.len() as f64;

        let mut val_loss = 0.0;
        for &i in &val_idx {
            val_loss += model.loss(&standardized[i], &samples[i].label)?;
        }
        val_loss /= val_idx.len() as f64;
        if !val_loss.is_finite() {
            return Err(BaselineError::NonFinite("validation loss"));
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });
        log::debug!("epoch {epoch}: train {train_loss:.5} val {val_loss:.5}");

        if val_loss < best.0 {
            best = (val_loss, model.clone(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= cfg.patience {
            break;
        }
    }

    Ok(TrainOutcome {
        model: best.1,
        best_epoch: best.2,
        history,
        train_indices: train_idx,
        val_indices: val_idx,
    })
}

fn validate(samples: &[TrainSample], cfg: &TrainConfig) -> Result<(), BaselineError> {
    let attack = samples.iter().filter(|s| s.label.is_attack()).count();
    let bonafide = samples.len() - attack;
    if attack == 0 || bonafide == 0 {
        return Err(BaselineError::SingleClassTrainingSet { attack, bonafide });
    }
    let bad = |msg: &str| Err(BaselineError::Config(msg.into()));
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return bad("lr must be positive");
    }
    if !(cfg.weight_decay >= 0.0) || !(0.0..1.0).contains(&cfg.beta1) || !(0.0..1.0).contains(&cfg.beta2) {
        return bad("weight_decay must be >= 0 and betas in [0, 1)");
    }
    if cfg.max_epochs == 0 || cfg.batch_size == 0 {
        return bad("max_epochs and batch_size must be positive");
    }
    if !(0.0..1.0).contains(&cfg.val_fraction) {
        return bad("val_fraction must be in [0, 1)");
    }
    let dim = samples[0].features.len();
    for s in samples {
        if s.features.len() != dim {
            return Err(BaselineError::DimensionMismatch {
                expected: dim,
                got: s.features.len(),
            });
        }
        if s.features.values.iter().any(|v| !v.is_finite()) {
            return Err(BaselineError::NonFinite("training features"));
        }
        if s.label.map.shape() != (cfg.map_rows, cfg.map_cols) {
            return Err(BaselineError::ShapeMismatch(s.label.map.shape(), (cfg.map_rows, cfg.map_cols)));
        }
    }
    Ok(())
}

/// Per class: floor(n * fraction) held out, at least one when the class has
/// two or more samples, never the whole class.
fn stratified_split(samples: &[TrainSample], fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for attack in [false, true] {
        let mut idx: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label.is_attack() == attack).collect();
        idx.shuffle(rng);
        let n = idx.len();
        let mut k = (n as f64 * fraction).floor() as usize;
        if fraction > 0.0 && n >= 2 {
            k = k.max(1);
        }
        k = k.min(n.saturating_sub(1));
        val.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Vec<TrainSample> {
        (0..n)
            .map(|i| {
                let attack = i % 2 == 0;
                let t = i as f64 * 0.37;
                let (cx, cy) = if attack { (2.0, 1.0) } else { (-2.0, -1.0) };
                TrainSample {
                    features: FeatureVector {
                        values: vec![cx + t.sin(), cy + t.cos()],
                    },
                    label: PwLabel::new(attack, 2, 2),
                }
            })
            .collect()
    }

    fn cfg() -> TrainConfig {
        TrainConfig {
            map_rows: 2,
            map_cols: 2,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn patience_zero_runs_one_epoch() {
        let out = train(&toy(20), &TrainConfig { patience: 0, ..cfg() }).unwrap();
        assert_eq!(out.epochs_run(), 1);
        assert_eq!(out.best_epoch, 1);
    }

    #[test]
    fn single_class_is_rejected() {
        let only: Vec<TrainSample> = toy(10).into_iter().filter(|s| s.label.is_attack()).collect();
        assert!(matches!(
            train(&only, &cfg()),
            Err(BaselineError::SingleClassTrainingSet { bonafide: 0, .. })
        ));
    }

    #[test]
    fn split_is_stratified_and_disjoint() {
        let samples = toy(30);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (tr, va) = stratified_split(&samples, 0.2, &mut rng);
        assert_eq!(tr.len() + va.len(), 30);
        assert!(tr.iter().all(|i| !va.contains(i)));
        assert_eq!(va.iter().filter(|&&i| samples[i].label.is_attack()).count(), 3);
        assert_eq!(va.len(), 6);
    }
}
