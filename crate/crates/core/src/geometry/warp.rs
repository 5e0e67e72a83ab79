//! Piecewise-affine warping by inverse mapping.

use rayon::prelude::*;

use super::affine::solve_affine;
use super::{signed_area, GeometryError, Point2, Triangle, TriangleMesh, EPS_AREA};
use crate::image::{FloatImage, Image};

const NO_OWNER: u32 = u32::MAX;
/// Barycentric slack so pixels on shared edges are claimed.
const INSIDE_EPS: f64 = 1e-9;

/// Warps `image` so that the mesh points move to `dst_points`.
pub fn warp_piecewise(image: &Image, src_mesh: &TriangleMesh, dst_points: &[Point2]) -> Result<Image, GeometryError> {
    warp_triangles(image, &src_mesh.triangles, &src_mesh.points, dst_points)
}

/// [`warp_piecewise`] with an explicit triangle topology shared by `src`
/// and `dst`.
pub fn warp_triangles(
    image: &Image,
    triangles: &[Triangle],
    src: &[Point2],
    dst: &[Point2],
) -> Result<Image, GeometryError> {
    Ok(warp_triangles_f64(image, triangles, src, dst)?.to_u8())
}

/// Unquantized warp. Each pixel inside a destination triangle takes the
/// bilinear sample at its inverse-mapped source position; the first
/// triangle (in list order) containing a pixel owns it. Pixels covered by
/// no triangle keep their input value.
pub fn warp_triangles_f64(
    image: &Image,
    triangles: &[Triangle],
    src: &[Point2],
    dst: &[Point2],
) -> Result<FloatImage, GeometryError> {
    if src.len() != dst.len() {
        return Err(GeometryError::MeshMismatch {
            mesh: src.len(),
            given: dst.len(),
        });
    }
    let (width, height, channels) = (image.width(), image.height(), image.channels());

    let mut inverse_maps = Vec::with_capacity(triangles.len());
    for (index, t) in triangles.iter().enumerate() {
        if let Some(&point) = t.indices().iter().find(|&&i| i >= src.len()) {
            return Err(GeometryError::IndexOutOfRange {
                index,
                point,
                len: src.len(),
            });
        }
        let d = t.vertices(dst);
        let area = signed_area(&d[0], &d[1], &d[2]);
        if area.abs() <= EPS_AREA {
            return Err(GeometryError::DegenerateTriangle { index, area });
        }
        let map = solve_affine(&d, &t.vertices(src)).map_err(|_| GeometryError::DegenerateTriangle { index, area })?;
        inverse_maps.push(map);
    }

    let owners = rasterize_owners(triangles, dst, width, height);

    let row_len = width * channels;
    let mut data = vec![0.0; row_len * height];
    data.par_chunks_mut(row_len).enumerate().for_each(|(y, row)| {
        for x in 0..width {
            let owner = owners[y * width + x];
            let out = &mut row[x * channels..(x + 1) * channels];
            if owner == NO_OWNER {
                for (c, v) in out.iter_mut().enumerate() {
                    *v = f64::from(image.get(x, y, c));
                }
            } else {
                let s = inverse_maps[owner as usize].apply(Point2::new(x as f64, y as f64));
                for (c, v) in out.iter_mut().enumerate() {
                    *v = image.sample_bilinear(s.x, s.y, c);
                }
            }
        }
    });
    Ok(FloatImage::from_raw(width, height, channels, data))
}

fn rasterize_owners(triangles: &[Triangle], dst: &[Point2], width: usize, height: usize) -> Vec<u32> {
    let mut owners = vec![NO_OWNER; width * height];
    for (ti, t) in triangles.iter().enumerate() {
        let [a, b, c] = t.vertices(dst);
        let min_x = a.x.min(b.x).min(c.x).floor().max(0.0);
        let max_x = a.x.max(b.x).max(c.x).ceil().min((width - 1) as f64);
        let min_y = a.y.min(b.y).min(c.y).floor().max(0.0);
        let max_y = a.y.max(b.y).max(c.y).ceil().min((height - 1) as f64);
        if min_x > max_x || min_y > max_y {
            continue;
        }
        let tester = InsideTest::new(a, b, c);
        for y in min_y as usize..=max_y as usize {
            for x in min_x as usize..=max_x as usize {
                let slot = &mut owners[y * width + x];
                if *slot == NO_OWNER && tester.contains(x as f64, y as f64) {
                    *slot = ti as u32;
                }
            }
        }
    }
    owners
}

struct InsideTest {
    a: Point2,
    b: Point2,
    c: Point2,
    inv_twice_area: f64,
}

impl InsideTest {
    fn new(a: Point2, b: Point2, c: Point2) -> Self {
        let twice = 2.0 * signed_area(&a, &b, &c);
        Self {
            a,
            b,
            c,
            inv_twice_area: 1.0 / twice,
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let edge = |p: &Point2, q: &Point2| ((q.x - p.x) * (y - p.y) - (x - p.x) * (q.y - p.y)) * self.inv_twice_area;
        edge(&self.a, &self.b) >= -INSIDE_EPS && edge(&self.b, &self.c) >= -INSIDE_EPS && edge(&self.c, &self.a) >= -INSIDE_EPS
    }
}
