use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::image::Image;
use crate::morph::{LandmarkSet, MOUTH_RANGE};

/// Black-mouth artifact detector settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactThresholds {
    /// Luma below this value counts as black (0..255 scale).
    pub black_luma: f64,
    /// Reject when the black share of the mouth box is strictly above this.
    pub black_fraction: f64,
    /// Mouth box growth per side, as a fraction of its width / height.
    pub mouth_dilation: f64,
}

impl Default for ArtifactThresholds {
    fn default() -> Self {
        Self {
            black_luma: 30.0,
            black_fraction: 0.10,
            mouth_dilation: 0.10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactReport {
    /// Inclusive pixel window `[x0, y0, x1, y1]`.
    pub mouth_box: [usize; 4],
    pub black_pixels: usize,
    pub total_pixels: usize,
    pub black_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ArtifactVerdict {
    Pass { report: ArtifactReport },
    Reject { reason: String, report: ArtifactReport },
}

impl ArtifactVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, ArtifactVerdict::Pass { .. })
    }

    pub fn report(&self) -> &ArtifactReport {
        match self {
            ArtifactVerdict::Pass { report } | ArtifactVerdict::Reject { report, .. } => report,
        }
    }
}

/// Flags morphs with dark holes in the mouth region, a typical failure of
/// landmark-driven morphing.
pub fn auto_reject_artifacts(
    image: &Image,
    landmarks: &LandmarkSet,
    thresholds: &ArtifactThresholds,
) -> Result<ArtifactVerdict, PipelineError> {
    if landmarks.len() < MOUTH_RANGE.end {
        return Err(PipelineError::MissingMouthLandmarks {
            needed: MOUTH_RANGE.end,
            got: landmarks.len(),
        });
    }
    let (mx0, my0, mx1, my1) = landmarks.bounds(MOUTH_RANGE).expect("mouth range checked above");
    let dx = thresholds.mouth_dilation * (mx1 - mx0);
    let dy = thresholds.mouth_dilation * (my1 - my0);
    let max_x = (image.width() - 1) as f64;
    let max_y = (image.height() - 1) as f64;
    let x0 = (mx0 - dx).floor().clamp(0.0, max_x) as usize;
    let y0 = (my0 - dy).floor().clamp(0.0, max_y) as usize;
    let x1 = (mx1 + dx).ceil().clamp(0.0, max_x) as usize;
    let y1 = (my1 + dy).ceil().clamp(0.0, max_y) as usize;

    let mut black = 0;
    for y in y0..=y1 {
        for x in x0..=x1 {
            if image.luma(x, y) < thresholds.black_luma {
                black += 1;
            }
        }
    }
    let total = (x1 - x0 + 1) * (y1 - y0 + 1);
    let fraction = black as f64 / total as f64;
    let report = ArtifactReport {
        mouth_box: [x0, y0, x1, y1],
        black_pixels: black,
        total_pixels: total,
        black_fraction: fraction,
    };
    if fraction > thresholds.black_fraction {
        Ok(ArtifactVerdict::Reject {
            reason: format!(
                "black mouth region: {:.1}% of pixels below luma {}",
                100.0 * fraction,
                thresholds.black_luma
            ),
            report,
        })
    } else {
        Ok(ArtifactVerdict::Pass { report })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    /// 68 points with the mouth spanning exactly `[10, 19] x [20, 29]` once
    /// dilation is off.
    fn landmarks() -> LandmarkSet {
        let mut pts = vec![Point2::new(5.0, 5.0); 68];
        for (k, i) in MOUTH_RANGE.enumerate() {
            pts[i] = Point2::new(10.0 + (k % 10) as f64, 20.0 + (k / 2) as f64 * 0.9);
        }
        pts[48] = Point2::new(10.0, 20.0);
        pts[54] = Point2::new(19.0, 29.0);
        LandmarkSet::new(40, 40, pts).unwrap()
    }

    fn exact() -> ArtifactThresholds {
        ArtifactThresholds {
            mouth_dilation: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn white_mouth_passes() {
        let img = Image::filled(40, 40, 3, 255).unwrap();
        let v = auto_reject_artifacts(&img, &landmarks(), &ArtifactThresholds::default()).unwrap();
        assert!(v.is_pass());
        assert_eq!(v.report().black_pixels, 0);
    }

    #[test]
    fn black_mouth_rejects() {
        let img = Image::filled(40, 40, 1, 0).unwrap();
        let v = auto_reject_artifacts(&img, &landmarks(), &ArtifactThresholds::default()).unwrap();
        assert!(!v.is_pass());
        assert_eq!(v.report().black_fraction, 1.0);
    }

    #[test]
    fn boundary_is_strictly_greater() {
        // 10x10 box, 10 black pixels = exactly 10%
        let mut img = Image::filled(40, 40, 1, 200).unwrap();
        for x in 10..20 {
            img.set(x, 20, 0, 0);
        }
        let v = auto_reject_artifacts(&img, &landmarks(), &exact()).unwrap();
        assert_eq!(v.report().total_pixels, 100);
        assert_eq!(v.report().black_pixels, 10);
        assert!(v.is_pass());

        img.set(10, 21, 0, 29);
        let v = auto_reject_artifacts(&img, &landmarks(), &exact()).unwrap();
        assert_eq!(v.report().black_pixels, 11);
        assert!(!v.is_pass());

        // luma 30 is not black
        img.set(10, 21, 0, 30);
        assert!(auto_reject_artifacts(&img, &landmarks(), &exact()).unwrap().is_pass());
    }

    #[test]
    fn dilation_grows_the_box() {
        let img = Image::filled(40, 40, 1, 200).unwrap();
        let v = auto_reject_artifacts(&img, &landmarks(), &ArtifactThresholds::default()).unwrap();
        assert_eq!(v.report().mouth_box, [9, 19, 20, 30]);
    }

    #[test]
    fn short_landmark_list_is_an_error() {
        let img = Image::filled(40, 40, 1, 200).unwrap();
        let lm = LandmarkSet::new(40, 40, vec![Point2::new(1.0, 1.0); 5]).unwrap();
        assert!(matches!(
            auto_reject_artifacts(&img, &lm, &ArtifactThresholds::default()),
            Err(PipelineError::MissingMouthLandmarks { .. })
        ));
    }
}
