use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BaselineError;
use crate::image::Image;
use crate::morph::{crop_extended, BBox, LandmarkSet, MAD_INPUT_SIZE};

/// Blocks per side of the feature grid.
pub const FEATURE_GRID: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Everything that determines the feature layout. Its hash is stored with
/// trained models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub kernel: String,
    pub grid: usize,
    pub input_size: usize,
    pub crop_extension: f64,
    pub stats: Vec<String>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            kernel: "laplacian4-clamped".into(),
            grid: FEATURE_GRID,
            input_size: MAD_INPUT_SIZE,
            crop_extension: 0.05,
            stats: vec!["mean".into(), "variance".into()],
        }
    }
}

impl FeatureConfig {
    pub fn dim(&self) -> usize {
        self.grid * self.grid * self.stats.len()
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Detector input: the landmark bounding box, extended and resized to
/// 224 x 224.
pub fn face_input(image: &Image, landmarks: &LandmarkSet) -> Result<Image, BaselineError> {
    let (x0, y0, x1, y1) = landmarks
        .bounds(0..landmarks.len())
        .ok_or(BaselineError::NonFinite("empty landmark set"))?;
    let bbox = BBox::new(x0, y0, (x1 - x0).max(1.0), (y1 - y0).max(1.0));
    Ok(crop_extended(image, &bbox, MAD_INPUT_SIZE)?)
}

/// Mean and variance of the 4-neighbour Laplacian residual of the luma
/// channel in each block of an 8 x 8 grid, laid out block by block
/// (row-major) as `[mean, variance]` pairs. Borders are clamped.
pub fn extract_features(image: &Image) -> FeatureVector {
    let (w, h) = image.dimensions();
    let luma: Vec<f64> = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| image.luma(x, y)).collect();
    let at = |x: isize, y: isize| {
        let cx = x.clamp(0, w as isize - 1) as usize;
        let cy = y.clamp(0, h as isize - 1) as usize;
        luma[cy * w + cx]
    };

    let mut values = Vec::with_capacity(FEATURE_GRID * FEATURE_GRID * 2);
    for by in 0..FEATURE_GRID {
        let (y0, y1) = (by * h / FEATURE_GRID, (by + 1) * h / FEATURE_GRID);
        for bx in 0..FEATURE_GRID {
            let (x0, x1) = (bx * w / FEATURE_GRID, (bx + 1) * w / FEATURE_GRID);
            let (mut sum, mut sum_sq, mut n) = (0.0, 0.0, 0usize);
            for y in y0..y1 {
                for x in x0..x1 {
                    let (xi, yi) = (x as isize, y as isize);
                    let r = 4.0 * at(xi, yi) - at(xi - 1, yi) - at(xi + 1, yi) - at(xi, yi - 1) - at(xi, yi + 1);
                    sum += r;
                    sum_sq += r * r;
                    n += 1;
                }
            }
            if n == 0 {
                values.extend([0.0, 0.0]);
            } else {
                let mean = sum / n as f64;
                values.extend([mean, (sum_sq / n as f64 - mean * mean).max(0.0)]);
            }
        }
    }
    FeatureVector { values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_zero_residual() {
        let f = extract_features(&Image::filled(224, 224, 3, 140).unwrap());
        assert_eq!(f.len(), 128);
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_and_config_hash_is_stable() {
        let img = Image::from_fn(224, 224, 1, |x, y, _| ((x * 7 + y * 13) % 251) as u8).unwrap();
        assert_eq!(extract_features(&img), extract_features(&img));
        assert_eq!(FeatureConfig::default().hash(), FeatureConfig::default().hash());
        assert_eq!(FeatureConfig::default().hash().len(), 64);
        assert_eq!(FeatureConfig::default().dim(), 128);
    }
}
