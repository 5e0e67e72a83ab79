use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{FeatureConfig, FeatureVector};
use super::loss::{pw_loss, Grid, PwLabel, BCE_EPS};
use super::BaselineError;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary output layer. `Softmax2` keeps one logit per class; its attack
/// probability is the sigmoid of the logit difference, so the two heads
/// describe the same function family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryHead {
    #[default]
    Sigmoid,
    Softmax2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Logit {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Logit {
    fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

/// One logistic unit per map cell, all reading the same feature vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapHead {
    pub rows: usize,
    pub cols: usize,
    /// `rows * cols` blocks of `dim` weights.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl MapHead {
    fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

/// Per-feature affine normalisation fitted on the training split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Population mean and standard deviation; constant features get
    /// std 1.
    pub fn fit<'a>(samples: impl IntoIterator<Item = &'a FeatureVector>, dim: usize) -> Self {
        let rows: Vec<&FeatureVector> = samples.into_iter().collect();
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in &rows {
            for (m, v) in mean.iter_mut().zip(&r.values) {
                *m += v / n;
            }
        }
        let mut std = vec![0.0; dim];
        for r in &rows {
            for ((s, v), m) in std.iter_mut().zip(&r.values).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        for s in &mut std {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        Self { mean, std }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub head: BinaryHead,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Bona fide logit of the `Softmax2` head.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bonafide_logit: Option<Logit>,
    pub map_head: MapHead,
    pub standardizer: Standardizer,
    pub feature_hash: String,
}

impl LinearModel {
    pub fn zeros(dim: usize, head: BinaryHead, map_rows: usize, map_cols: usize) -> Self {
        let cells = map_rows * map_cols;
        Self {
            head,
            weights: vec![0.0; dim],
            bias: 0.0,
            bonafide_logit: (head == BinaryHead::Softmax2).then(|| Logit::zeros(dim)),
            map_head: MapHead {
                rows: map_rows,
                cols: map_cols,
                weights: vec![0.0; cells * dim],
                bias: vec![0.0; cells],
            },
            standardizer: Standardizer::identity(dim),
            feature_hash: FeatureConfig::default().hash(),
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn standardize(&self, features: &FeatureVector) -> Result<Vec<f64>, BaselineError> {
        if features.len() != self.dim() {
            return Err(BaselineError::DimensionMismatch {
                expected: self.dim(),
                got: features.len(),
            });
        }
        if features.values.iter().any(|v| !v.is_finite()) {
            return Err(BaselineError::NonFinite("feature vector"));
        }
        Ok(self.standardizer.apply(&features.values))
    }

    /// Attack logit on standardized features (the logit difference for the
    /// two-way head).
    fn binary_logit(&self, x: &[f64]) -> f64 {
        let z = dot(&self.weights, x) + self.bias;
        match &self.bonafide_logit {
            Some(bf) => z - bf.eval(x),
            None => z,
        }
    }

    /// Map-cell probabilities and attack probability on standardized
    /// features.
    pub fn predict_standardized(&self, x: &[f64]) -> (Grid, f64) {
        let d = self.dim();
        let m = &self.map_head;
        let values = (0..m.cells())
            .map(|j| sigmoid(dot(&m.weights[j * d..(j + 1) * d], x) + m.bias[j]))
            .collect();
        let map = Grid {
            rows: m.rows,
            cols: m.cols,
            values,
        };
        (map, sigmoid(self.binary_logit(x)))
    }

    /// Attack probability `sigmoid(w . x + b)` of raw features.
    pub fn score(&self, features: &FeatureVector) -> Result<f64, BaselineError> {
        Ok(sigmoid(self.binary_logit(&self.standardize(features)?)))
    }

    pub fn loss(&self, x: &[f64], label: &PwLabel) -> Result<f64, BaselineError> {
        let (map, p) = self.predict_standardized(x);
        pw_loss(&map, &label.map, p, label.binary)
    }

    /// Combined loss and its gradient in [`params`](Self::params) order.
    pub fn loss_and_grad(&self, x: &[f64], label: &PwLabel) -> Result<(f64, Vec<f64>), BaselineError> {
        let (map, p) = self.predict_standardized(x);
        let loss = pw_loss(&map, &label.map, p, label.binary)?;
        let cells = self.map_head.cells();
        let mut grad = Vec::with_capacity(self.param_count());

        let gz = clamped_residual(p, label.binary);
        grad.extend(x.iter().map(|v| gz * v));
        grad.push(gz);
        if self.bonafide_logit.is_some() {
            grad.extend(x.iter().map(|v| -gz * v));
            grad.push(-gz);
        }
        let mut map_bias = Vec::with_capacity(cells);
        for (q, y) in map.values.iter().zip(&label.map.values) {
            let g = clamped_residual(*q, *y) / cells as f64;
            grad.extend(x.iter().map(|v| g * v));
            map_bias.push(g);
        }
        grad.extend(map_bias);
        debug_assert_eq!(grad.len(), self.param_count());
        Ok((loss, grad))
    }

    pub fn param_count(&self) -> usize {
        let d = self.dim();
        let binary = if self.bonafide_logit.is_some() { 2 * (d + 1) } else { d + 1 };
        binary + self.map_head.cells() * (d + 1)
    }

    /// Flat parameter vector: binary weights and bias, the bona fide logit
    /// (two-way head only), map weights, map biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend(&self.weights);
        out.push(self.bias);
        if let Some(bf) = &self.bonafide_logit {
            out.extend(&bf.weights);
            out.push(bf.bias);
        }
        out.extend(&self.map_head.weights);
        out.extend(&self.map_head.bias);
        out
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count(), "parameter vector length");
        let d = self.dim();
        let mut rest = params;
        let mut take = |n: usize| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head
        };
        self.weights.copy_from_slice(take(d));
        self.bias = take(1)[0];
        if let Some(bf) = &mut self.bonafide_logit {
            bf.weights.copy_from_slice(take(d));
            bf.bias = take(1)[0];
        }
        let cells = self.map_head.cells();
        self.map_head.weights.copy_from_slice(take(cells * d));
        self.map_head.bias.copy_from_slice(take(cells));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BaselineError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| BaselineError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Loads a model and checks it was trained on the current feature
    /// layout.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BaselineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| BaselineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let model: LinearModel = serde_json::from_str(&text).map_err(|source| BaselineError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let current = FeatureConfig::default().hash();
        if model.feature_hash != current {
            return Err(BaselineError::FeatureConfigMismatch {
                model: model.feature_hash,
                current,
            });
        }
        if model.params().iter().any(|v| !v.is_finite()) {
            return Err(BaselineError::NonFinite("model parameters"));
        }
        Ok(model)
    }
}

/// d bce(sigmoid(z), y) / dz, zero where the probability clamp is active.
fn clamped_residual(p: f64, y: f64) -> f64 {
    if p < BCE_EPS || p > 1.0 - BCE_EPS {
        0.0
    } else {
        p - y
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_scores_one_half() {
        let m = LinearModel::zeros(128, BinaryHead::Sigmoid, 14, 14);
        let f = FeatureVector { values: vec![3.0; 128] };
        assert_eq!(m.score(&f).unwrap(), 0.5);
        assert!(matches!(
            m.score(&FeatureVector { values: vec![0.0; 5] }),
            Err(BaselineError::DimensionMismatch { expected: 128, got: 5 })
        ));
    }

    #[test]
    fn score_is_sigmoid_of_affine_projection() {
        let mut m = LinearModel::zeros(2, BinaryHead::Sigmoid, 1, 1);
        m.weights = vec![2.0, -1.0];
        m.bias = -3.0;
        // 2 * 2 - 1 * 1 - 3 = 0
        assert_eq!(m.score(&FeatureVector { values: vec![2.0, 1.0] }).unwrap(), 0.5);
        assert!((m.score(&FeatureVector { values: vec![3.0, 1.0] }).unwrap() - sigmoid(2.0)).abs() < 1e-15);
    }

    #[test]
    fn params_round_trip() {
        for head in [BinaryHead::Sigmoid, BinaryHead::Softmax2] {
            let mut m = LinearModel::zeros(3, head, 2, 2);
            let p: Vec<f64> = (0..m.param_count()).map(|i| i as f64 * 0.1).collect();
            m.set_params(&p);
            assert_eq!(m.params(), p);
        }
    }

    #[test]
    fn json_round_trip_and_hash_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let mut m = LinearModel::zeros(128, BinaryHead::Softmax2, 14, 14);
        m.bias = 0.25;
        m.save(&path).unwrap();
        assert_eq!(LinearModel::load(&path).unwrap(), m);
        m.feature_hash = "0".repeat(64);
        m.save(&path).unwrap();
        assert!(matches!(
            LinearModel::load(&path),
            Err(BaselineError::FeatureConfigMismatch { .. })
        ));
    }
}
