use serde::{Deserialize, Serialize};

use super::BaselineError;

/// Probability clamp used by [`bce`].
pub const BCE_EPS: f64 = 1e-7;

/// Binary cross-entropy with `p` clamped to `[BCE_EPS, 1 - BCE_EPS]`.
pub fn bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Row-major grid of reals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            values: vec![value; rows * cols],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// Pixel-wise supervision: a constant map (all 0 for bona fide, all 1 for
/// attack) plus the binary label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PwLabel {
    pub map: Grid,
    pub binary: f64,
}

impl PwLabel {
    pub fn new(attack: bool, rows: usize, cols: usize) -> Self {
        let y = if attack { 1.0 } else { 0.0 };
        Self {
            map: Grid::filled(rows, cols, y),
            binary: y,
        }
    }

    pub fn is_attack(&self) -> bool {
        self.binary >= 0.5
    }
}

/// Mean map-cell BCE plus the BCE of the binary output.
pub fn pw_loss(map_pred: &Grid, map_label: &Grid, bin_pred: f64, bin_label: f64) -> Result<f64, BaselineError> {
    if map_pred.shape() != map_label.shape()
        || map_pred.values.len() != map_label.values.len()
        || map_pred.values.is_empty()
    {
        return Err(BaselineError::ShapeMismatch(map_pred.shape(), map_label.shape()));
    }
    let map: f64 = map_pred
        .values
        .iter()
        .zip(&map_label.values)
        .map(|(&p, &y)| bce(p, y))
        .sum::<f64>()
        / map_pred.values.len() as f64;
    Ok(map + bce(bin_pred, bin_label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bce_values() {
        assert!((bce(0.5, 0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((bce(0.5, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(bce(1.0, 1.0) <= 1e-6 && bce(0.0, 0.0) <= 1e-6);
        assert!((bce(0.9, 0.0) - 2.302585).abs() < 1e-6);
        assert!(bce(0.0, 1.0).is_finite());
    }

    #[test]
    fn pw_loss_cases() {
        let label = PwLabel::new(true, 14, 14);
        assert!(pw_loss(&Grid::filled(14, 14, 1.0), &label.map, 1.0, 1.0).unwrap() <= 2e-6);
        let half = pw_loss(&Grid::filled(14, 14, 0.5), &label.map, 0.5, 1.0).unwrap();
        assert!((half - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!(matches!(
            pw_loss(&Grid::filled(4, 4, 0.5), &label.map, 0.5, 1.0),
            Err(BaselineError::ShapeMismatch(..))
        ));
    }
}
