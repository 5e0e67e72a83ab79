use serde::{Deserialize, Serialize};

use super::{signed_area, GeometryError, Point2, EPS_AREA, EPS_DET};

/// 2x3 affine map `[A | t]` acting on column vectors `(x, y, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform2 {
    pub m: [[f64; 3]; 2],
}

impl AffineTransform2 {
    pub const IDENTITY: AffineTransform2 = AffineTransform2 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    };

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self {
            m: [[1.0, 0.0, dx], [0.0, 1.0, dy]],
        }
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        let m = &self.m;
        Point2::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        )
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Result<AffineTransform2, GeometryError> {
        let det = self.determinant();
        if det.abs() <= EPS_DET {
            return Err(GeometryError::DegenerateTriangle { index: 0, area: det });
        }
        let m = &self.m;
        let (a, b, c, d) = (m[1][1] / det, -m[0][1] / det, -m[1][0] / det, m[0][0] / det);
        let tx = -(a * m[0][2] + b * m[1][2]);
        let ty = -(c * m[0][2] + d * m[1][2]);
        Ok(AffineTransform2 {
            m: [[a, b, tx], [c, d, ty]],
        })
    }
}

/// Affine map taking each `src[i]` to `dst[i]`.
///
/// Both triangles must have area above [`EPS_AREA`](super::EPS_AREA).
pub fn affine_from_triangles(src: &[Point2; 3], dst: &[Point2; 3]) -> Result<AffineTransform2, GeometryError> {
    let dst_area = signed_area(&dst[0], &dst[1], &dst[2]);
    if dst_area.abs() <= EPS_AREA {
        return Err(GeometryError::DegenerateTriangle { index: 1, area: dst_area });
    }
    let t = solve_affine(src, dst)?;
    if t.determinant().abs() <= EPS_DET {
        return Err(GeometryError::DegenerateTriangle {
            index: 1,
            area: t.determinant(),
        });
    }
    Ok(t)
}

/// Affine map taking `from[i]` to `to[i]`; only `from` must be non-degenerate.
pub(crate) fn solve_affine(from: &[Point2; 3], to: &[Point2; 3]) -> Result<AffineTransform2, GeometryError> {
    let (e1x, e1y) = (from[1].x - from[0].x, from[1].y - from[0].y);
    let (e2x, e2y) = (from[2].x - from[0].x, from[2].y - from[0].y);
    let det = e1x * e2y - e2x * e1y;
    if (0.5 * det).abs() <= EPS_AREA {
        return Err(GeometryError::DegenerateTriangle {
            index: 0,
            area: 0.5 * det,
        });
    }
    let (f1x, f1y) = (to[1].x - to[0].x, to[1].y - to[0].y);
    let (f2x, f2y) = (to[2].x - to[0].x, to[2].y - to[0].y);

    // A = F * E^-1 with E = [e1 e2], F = [f1 f2]
    let a00 = (f1x * e2y - f2x * e1y) / det;
    let a01 = (f2x * e1x - f1x * e2x) / det;
    let a10 = (f1y * e2y - f2y * e1y) / det;
    let a11 = (f2y * e1x - f1y * e2x) / det;

    let tx = to[0].x - (a00 * from[0].x + a01 * from[0].y);
    let ty = to[0].y - (a10 * from[0].x + a11 * from[0].y);
    Ok(AffineTransform2 {
        m: [[a00, a01, tx], [a10, a11, ty]],
    })
}
