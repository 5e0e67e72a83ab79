//! Landmark-based face morphing.
//!
//! A morph of images A and B moves both faces onto interpolated landmarks
//! (warping factor `w`), then mixes the two warped images pixel by pixel
//! (blending factor `β`). Both warps share one Delaunay topology built on
//! the interpolated landmarks so triangles correspond one to one.

mod crop;
mod engine;
mod landmarks;

use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::image::ImageError;

pub use self::crop::{crop_extended, extended_crop_window, BBox, MAD_INPUT_SIZE};
pub use self::engine::{interpolate_landmarks, morph, sample_warp_factor, MorphEngine, MorphParams};
pub use self::landmarks::{boundary_points, LandmarkSet, CANONICAL_POINTS, MOUTH_RANGE};

#[derive(Debug, Error)]
pub enum MorphError {
    #[error("landmark count mismatch: {0} vs {1}")]
    LandmarkCountMismatch(usize, usize),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("invalid landmarks: {0}")]
    InvalidLandmarks(String),
    #[error("invalid morph parameters: {0}")]
    InvalidParams(String),
    #[error("bounding box does not intersect the {width}x{height} image")]
    EmptyIntersection { width: usize, height: usize },
    #[error("cannot parse landmark file {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Image(#[from] ImageError),
}
