use rand::Rng;
use rayon::join;
use serde::{Deserialize, Serialize};

use super::landmarks::boundary_points;
use super::{LandmarkSet, MorphError};
use crate::geometry::{delaunay, warp_triangles_f64, Point2, TriangleMesh, EPS_DUP};
use crate::image::{FloatImage, Image};

/// Blending factor `blend` (pixel mix, weight of image B), warping factor
/// `warp` (geometry position between A and B) and the pair seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphParams {
    pub blend: f64,
    pub warp: f64,
    pub seed: u64,
}

impl MorphParams {
    pub fn new(blend: f64, warp: f64, seed: u64) -> Result<Self, MorphError> {
        let p = Self { blend, warp, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MorphError> {
        for (name, v) in [("blend", self.blend), ("warp", self.warp)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(MorphError::InvalidParams(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

impl Default for MorphParams {
    fn default() -> Self {
        Self {
            blend: 0.5,
            warp: 0.5,
            seed: 0,
        }
    }
}

/// Uniform warping factor in `[0, 1]`.
pub fn sample_warp_factor<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(0.0..=1.0)
}

/// Per-point `(1 - w) * a + w * b`.
pub fn interpolate_landmarks(a: &LandmarkSet, b: &LandmarkSet, w: f64) -> Result<LandmarkSet, MorphError> {
    if a.len() != b.len() {
        return Err(MorphError::LandmarkCountMismatch(a.len(), b.len()));
    }
    if (a.width, a.height) != (b.width, b.height) {
        return Err(MorphError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    let points = a.points.iter().zip(&b.points).map(|(p, q)| p.lerp(q, w)).collect();
    Ok(LandmarkSet {
        image: None,
        width: a.width,
        height: a.height,
        points,
    })
}

/// Morph with the default engine (frame boundary points on).
pub fn morph(
    img_a: &Image,
    lm_a: &LandmarkSet,
    img_b: &Image,
    lm_b: &LandmarkSet,
    params: &MorphParams,
) -> Result<(Image, LandmarkSet), MorphError> {
    MorphEngine::default().morph(img_a, lm_a, img_b, lm_b, params)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphEngine {
    /// Append frame corners and edge midpoints before triangulating so the
    /// mesh covers the whole image.
    pub augment_boundary: bool,
}

impl Default for MorphEngine {
    fn default() -> Self {
        Self { augment_boundary: true }
    }
}

impl MorphEngine {
    /// Frame points that will be appended to every landmark list of a morph
    /// targeting `target`; points colliding with a target landmark are
    /// dropped.
    fn frame_points(&self, target: &LandmarkSet) -> Vec<Point2> {
        if !self.augment_boundary {
            return Vec::new();
        }
        boundary_points(target.width, target.height)
            .into_iter()
            .filter(|b| target.points.iter().all(|p| p.distance(b) >= EPS_DUP))
            .collect()
    }

    fn augmented(points: &[Point2], frame: &[Point2]) -> Vec<Point2> {
        points.iter().chain(frame).copied().collect()
    }

    /// The Delaunay mesh both sources are warped through when morphing onto
    /// `target`.
    pub fn target_mesh(&self, target: &LandmarkSet) -> Result<TriangleMesh, MorphError> {
        let frame = self.frame_points(target);
        Ok(delaunay(&Self::augmented(&target.points, &frame))?)
    }

    /// Source point lists (A, B) matching [`Self::target_mesh`] indexing.
    pub fn source_points(&self, target: &LandmarkSet, a: &LandmarkSet, b: &LandmarkSet) -> (Vec<Point2>, Vec<Point2>) {
        let frame = self.frame_points(target);
        (Self::augmented(&a.points, &frame), Self::augmented(&b.points, &frame))
    }

    pub fn morph(
        &self,
        img_a: &Image,
        lm_a: &LandmarkSet,
        img_b: &Image,
        lm_b: &LandmarkSet,
        params: &MorphParams,
    ) -> Result<(Image, LandmarkSet), MorphError> {
        let (blended, target) = self.morph_f64(img_a, lm_a, img_b, lm_b, params)?;
        Ok((blended.to_u8(), target))
    }

    /// Unquantized morph output.
    pub fn morph_f64(
        &self,
        img_a: &Image,
        lm_a: &LandmarkSet,
        img_b: &Image,
        lm_b: &LandmarkSet,
        params: &MorphParams,
    ) -> Result<(FloatImage, LandmarkSet), MorphError> {
        params.validate()?;
        check_image_pair(img_a, img_b)?;
        for lm in [lm_a, lm_b] {
            if (lm.width, lm.height) != img_a.dimensions() {
                return Err(MorphError::DimensionMismatch(lm.width, lm.height, img_a.width(), img_a.height()));
            }
            lm.validate()?;
        }

        let target = interpolate_landmarks(lm_a, lm_b, params.warp)?;
        let mesh = self.target_mesh(&target)?;
        let (src_a, src_b) = self.source_points(&target, lm_a, lm_b);

        let (warped_a, warped_b) = join(
            || warp_triangles_f64(img_a, &mesh.triangles, &src_a, &mesh.points),
            || warp_triangles_f64(img_b, &mesh.triangles, &src_b, &mesh.points),
        );
        let (warped_a, warped_b) = (warped_a?, warped_b?);

        let beta = params.blend;
        let data = warped_a
            .data()
            .iter()
            .zip(warped_b.data())
            .map(|(&a, &b)| (1.0 - beta) * a + beta * b)
            .collect();
        let out = FloatImage::from_raw(img_a.width(), img_a.height(), img_a.channels(), data);
        Ok((out, target))
    }
}

fn check_image_pair(a: &Image, b: &Image) -> Result<(), MorphError> {
    if a.dimensions() != b.dimensions() {
        return Err(MorphError::DimensionMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    if a.channels() != b.channels() {
        return Err(MorphError::InvalidParams(format!(
            "channel mismatch: {} vs {}",
            a.channels(),
            b.channels()
        )));
    }
    Ok(())
}
