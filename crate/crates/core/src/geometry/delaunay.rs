//! Bowyer–Watson triangulation.
//!
//! The enclosing super-triangle is symbolic: its apex sits at infinity and
//! every convex-hull edge carries a "ghost" triangle joining it to that apex.
//! A point conflicts with a ghost when it lies strictly outside the hull edge
//! (or on the open edge itself). This removes the usual finite
//! super-triangle failure where hull triangles go missing after the
//! super-vertices are stripped.

use std::collections::{HashMap, HashSet};

use super::{orient, signed_area, GeometryError, Point2, Triangle, TriangleMesh, EPS_AREA, EPS_DUP};

const GHOST: usize = usize::MAX;

type Tri = [usize; 3];

/// Delaunay triangulation of `points`.
///
/// Triangles are counter-clockwise, rotated so the smallest index comes
/// first, and sorted; output depends only on the input order. Exactly
/// cocircular quadrilaterals take the diagonal touching their lowest-index
/// vertex.
pub fn delaunay(points: &[Point2]) -> Result<TriangleMesh, GeometryError> {
    validate_input(points)?;
    let seed = seed_triangle(points)?;
    let [a, b, c] = seed;
    let mut tris: Vec<Tri> = vec![seed, [b, a, GHOST], [c, b, GHOST], [a, c, GHOST]];

    for p in 0..points.len() {
        if seed.contains(&p) {
            continue;
        }
        insert(points, &mut tris, p)?;
    }

    let mut real: Vec<Tri> = tris.into_iter().filter(|t| !t.contains(&GHOST)).collect();
    legalize(points, &mut real);

    let mut triangles: Vec<Triangle> = real
        .into_iter()
        .map(|t| {
            let r = rotate_min_first(t);
            Triangle::new(r[0], r[1], r[2])
        })
        .collect();
    triangles.sort_unstable();

    for (index, t) in triangles.iter().enumerate() {
        let [p, q, r] = t.vertices(points);
        let area = signed_area(&p, &q, &r);
        if area <= EPS_AREA {
            return Err(GeometryError::DegenerateInput(format!(
                "near-collinear points {:?} produce triangle {index} with area {area:e}",
                t.indices()
            )));
        }
    }

    Ok(TriangleMesh {
        points: points.to_vec(),
        triangles,
    })
}

fn validate_input(points: &[Point2]) -> Result<(), GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::DegenerateInput(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(GeometryError::DegenerateInput(format!("point {i} is not finite")));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].x.total_cmp(&points[j].x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x >= EPS_DUP {
                break;
            }
            if points[i].distance(&points[j]) < EPS_DUP {
                let (lo, hi) = (i.min(j), i.max(j));
                return Err(GeometryError::DegenerateInput(format!(
                    "points {lo} and {hi} are closer than {EPS_DUP}"
                )));
            }
        }
    }
    Ok(())
}

/// First non-collinear triple in input order, counter-clockwise.
fn seed_triangle(points: &[Point2]) -> Result<Tri, GeometryError> {
    let (a, b) = (0, 1);
    for c in 2..points.len() {
        let o = orient(&points[a], &points[b], &points[c]);
        if o > 0.0 {
            return Ok([a, b, c]);
        }
        if o < 0.0 {
            return Ok([b, a, c]);
        }
    }
    Err(GeometryError::DegenerateInput("all points are collinear".into()))
}

fn in_conflict(points: &[Point2], t: &Tri, p: usize) -> bool {
    let pp = &points[p];
    if t[2] == GHOST {
        // ghost [a, b, ∞] sits on the hull edge b -> a
        let (a, b) = (&points[t[0]], &points[t[1]]);
        let o = orient(a, b, pp);
        o > 0.0 || (o == 0.0 && strictly_between(a, b, pp))
    } else {
        robust::incircle(
            points[t[0]].coord(),
            points[t[1]].coord(),
            points[t[2]].coord(),
            pp.coord(),
        ) > 0.0
    }
}

/// `p` is collinear with `a`, `b`; is it inside the open segment?
fn strictly_between(a: &Point2, b: &Point2, p: &Point2) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let t_a = (p.x - a.x) * dx + (p.y - a.y) * dy;
    let t_b = (b.x - p.x) * dx + (b.y - p.y) * dy;
    t_a > 0.0 && t_b > 0.0
}

fn insert(points: &[Point2], tris: &mut Vec<Tri>, p: usize) -> Result<(), GeometryError> {
    let conflict: Vec<bool> = tris.iter().map(|t| in_conflict(points, t, p)).collect();
    if !conflict.iter().any(|&c| c) {
        return Err(GeometryError::DegenerateInput(format!("point {p} has an empty cavity")));
    }

    let mut cavity_edges = HashSet::new();
    for (t, _) in tris.iter().zip(&conflict).filter(|(_, &c)| c) {
        for (u, v) in edges(t) {
            cavity_edges.insert((u, v));
        }
    }

    let mut next = Vec::with_capacity(tris.len() + 2);
    let mut fresh = Vec::new();
    for (t, &c) in tris.iter().zip(&conflict) {
        if !c {
            next.push(*t);
            continue;
        }
        for (u, v) in edges(t) {
            if !cavity_edges.contains(&(v, u)) {
                fresh.push(star_triangle(u, v, p));
            }
        }
    }
    next.extend(fresh);
    *tris = next;
    Ok(())
}

fn edges(t: &Tri) -> [(usize, usize); 3] {
    [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
}

/// Triangle joining cavity edge `u -> v` to the new point, ghost apex last.
fn star_triangle(u: usize, v: usize, p: usize) -> Tri {
    if u == GHOST {
        [v, p, GHOST]
    } else if v == GHOST {
        [p, u, GHOST]
    } else {
        [u, v, p]
    }
}

fn rotate_min_first(t: Tri) -> Tri {
    let k = (0..3).min_by_key(|&i| t[i]).unwrap_or(0);
    [t[k], t[(k + 1) % 3], t[(k + 2) % 3]]
}

/// Edge flips until every interior edge is locally Delaunay and every
/// cocircular quadrilateral uses the diagonal through its lowest index.
///
/// Terminates: strict flips lower the lifted surface, and tie flips keep it
/// fixed while strictly lowering the multiset of per-edge minimum indices.
fn legalize(points: &[Point2], tris: &mut [Tri]) {
    loop {
        let mut by_edge: HashMap<(usize, usize), (usize, usize)> = HashMap::with_capacity(tris.len() * 3);
        for (ti, t) in tris.iter().enumerate() {
            for k in 0..3 {
                by_edge.insert((t[k], t[(k + 1) % 3]), (ti, t[(k + 2) % 3]));
            }
        }

        let mut flip = None;
        'search: for t in tris.iter() {
            for k in 0..3 {
                let (u, v, o1) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                if u > v {
                    continue;
                }
                let Some(&(tj, o2)) = by_edge.get(&(v, u)) else {
                    continue;
                };
                let ic = robust::incircle(
                    points[u].coord(),
                    points[v].coord(),
                    points[o1].coord(),
                    points[o2].coord(),
                );
                if ic > 0.0 || (ic == 0.0 && o1.min(o2) < u.min(v)) {
                    let ti = by_edge[&(u, v)].0;
                    flip = Some((ti, tj, u, v, o1, o2));
                    break 'search;
                }
            }
        }

        match flip {
            Some((ti, tj, u, v, o1, o2)) => {
                tris[ti] = [o1, u, o2];
                tris[tj] = [o2, v, o1];
            }
            None => return,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[(f64, f64)]) -> Vec<Point2> {
        raw.iter().map(|&p| p.into()).collect()
    }

    #[test]
    fn three_points_one_triangle() {
        let mesh = delaunay(&pts(&[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)])).unwrap();
        assert_eq!(mesh.triangles, vec![Triangle::new(0, 2, 1)]);
    }

    #[test]
    fn unit_square_takes_diagonal_through_lowest_index() {
        let mesh = delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        assert_eq!(mesh.triangles, vec![Triangle::new(0, 1, 2), Triangle::new(0, 2, 3)]);

        // same square, different labelling: vertex 0 is now (1, 0)
        let mesh = delaunay(&pts(&[(1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)])).unwrap();
        assert!(mesh.triangles.iter().all(|t| t.indices().contains(&0)));
    }

    #[test]
    fn collinear_input_is_rejected() {
        let err = delaunay(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])).unwrap_err();
        assert!(matches!(err, GeometryError::DegenerateInput(_)));
    }

    #[test]
    fn duplicates_and_too_few_points_are_rejected() {
        assert!(delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0)])).is_err());
        assert!(delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 5e-7)])).is_err());
        assert!(delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0), (f64::NAN, 1.0)])).is_err());
    }

    #[test]
    fn collinear_prefix_then_off_line_point() {
        // the seed triangle must skip the collinear run
        let mesh = delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (1.5, 1.0)])).unwrap();
        assert_eq!(mesh.triangles.len(), 3);
        assert!((mesh.area() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn point_on_hull_edge_splits_it() {
        let mesh = delaunay(&pts(&[(0.0, 0.0), (4.0, 0.0), (2.0, 3.0), (2.0, 0.0)])).unwrap();
        assert_eq!(mesh.triangles.len(), 2);
        assert!((mesh.area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn grid_is_fully_covered() {
        let mut raw = Vec::new();
        for y in 0..6 {
            for x in 0..7 {
                raw.push((x as f64, y as f64));
            }
        }
        let mesh = delaunay(&pts(&raw)).unwrap();
        assert_eq!(mesh.triangles.len(), 2 * 6 * 5);
        assert!((mesh.area() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn output_is_deterministic() {
        let raw: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = i as f64;
                ((t * 7.31).sin() * 50.0, (t * 3.17).cos() * 50.0)
            })
            .collect();
        let a = delaunay(&pts(&raw)).unwrap();
        let b = delaunay(&pts(&raw)).unwrap();
        assert_eq!(a, b);
    }
}
