//! Exact 2-D geometry for landmark morphing.
//!
//! Orientation and in-circle decisions use adaptive-precision predicates so
//! triangulations are reproducible on exactly cocircular or collinear input
//! (grid landmarks and the frame boundary points are both common).

mod affine;
mod delaunay;
mod warp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::affine::{affine_from_triangles, AffineTransform2};
pub use self::delaunay::delaunay;
pub use self::warp::{warp_piecewise, warp_triangles, warp_triangles_f64};

/// Minimum distance between two input points.
pub const EPS_DUP: f64 = 1e-6;
/// Minimum triangle area, px².
pub const EPS_AREA: f64 = 1e-9;
/// Tolerance for empty-circumcircle checks on normalized coordinates.
pub const EPS_CIRC: f64 = 1e-9;
/// Minimum |det| of an affine linear part.
pub const EPS_DET: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("degenerate triangle {index}: area {area:e}")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("mesh has {mesh} points but {given} destination points were given")]
    MeshMismatch { mesh: usize, given: usize },
    #[error("triangle {index} references point {point} outside a list of {len}")]
    IndexOutOfRange { index: usize, point: usize, len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// `(1 - t) * self + t * other`, exact at `t = 0` and `t = 1`.
    pub fn lerp(&self, other: &Point2, t: f64) -> Point2 {
        Point2::new((1.0 - t) * self.x + t * other.x, (1.0 - t) * self.y + t * other.y)
    }

    #[inline]
    pub(crate) fn coord(&self) -> robust::Coord<f64> {
        robust::Coord { x: self.x, y: self.y }
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// Exact orientation: positive when `a, b, c` turn counter-clockwise.
#[inline]
pub fn orient(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    robust::orient2d(a.coord(), b.coord(), c.coord())
}

/// Signed area of the triangle `a, b, c` (positive when counter-clockwise).
#[inline]
pub fn signed_area(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Three point indices, counter-clockwise in the owning mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triangle {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl Triangle {
    pub const fn new(a: usize, b: usize, c: usize) -> Self {
        Self { a, b, c }
    }

    pub fn indices(&self) -> [usize; 3] {
        [self.a, self.b, self.c]
    }

    pub fn vertices(&self, points: &[Point2]) -> [Point2; 3] {
        [points[self.a], points[self.b], points[self.c]]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub points: Vec<Point2>,
    pub triangles: Vec<Triangle>,
}

impl TriangleMesh {
    /// Total unsigned area of all triangles.
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.vertices(&self.points);
                signed_area(&a, &b, &c).abs()
            })
            .sum()
    }
}
