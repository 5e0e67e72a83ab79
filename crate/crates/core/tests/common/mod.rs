//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the code paths it is used to check.
#![allow(dead_code)]

pub mod metrics;

use morphforge::geometry::{Point2, TriangleMesh};
use morphforge::Image;
use rand::Rng;

/// Uniform points in `[0, w] x [0, h]`, at least 1e-3 apart.
pub fn random_points<R: Rng>(rng: &mut R, n: usize, w: f64, h: f64) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = Point2::new(rng.gen_range(0.0..=w), rng.gen_range(0.0..=h));
        if pts.iter().all(|q| (q.x - p.x).hypot(q.y - p.y) > 1e-3) {
            pts.push(p);
        }
    }
    pts
}

/// Number of (point, triangle) pairs where the point lies strictly inside
/// the triangle's circumcircle. Coordinates are first normalized to the
/// unit box; `tol` is applied to the normalized radius.
pub fn brute_force_delaunay_violations(mesh: &TriangleMesh, tol: f64) -> usize {
    let (min_x, max_x) = mesh.points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
    let (min_y, max_y) = mesh.points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    let scale = (max_x - min_x).max(max_y - min_y);
    let norm: Vec<(f64, f64)> = mesh
        .points
        .iter()
        .map(|p| ((p.x - min_x) / scale, (p.y - min_y) / scale))
        .collect();

    let mut violations = 0;
    for t in &mesh.triangles {
        let (a, b, c) = (norm[t.a], norm[t.b], norm[t.c]);
        let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
        let a2 = a.0 * a.0 + a.1 * a.1;
        let b2 = b.0 * b.0 + b.1 * b.1;
        let c2 = c.0 * c.0 + c.1 * c.1;
        let ux = (a2 * (b.1 - c.1) + b2 * (c.1 - a.1) + c2 * (a.1 - b.1)) / d;
        let uy = (a2 * (c.0 - b.0) + b2 * (a.0 - c.0) + c2 * (b.0 - a.0)) / d;
        let r = (a.0 - ux).hypot(a.1 - uy);
        for (i, p) in norm.iter().enumerate() {
            if i == t.a || i == t.b || i == t.c {
                continue;
            }
            if (p.0 - ux).hypot(p.1 - uy) < r - tol {
                violations += 1;
            }
        }
    }
    violations
}

/// Convex hull area by Andrew's monotone chain and the shoelace formula.
pub fn convex_hull_area(points: &[Point2]) -> f64 {
    let mut p: Vec<(f64, f64)> = points.iter().map(|q| (q.x, q.y)).collect();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    let n = hull.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    twice.abs() / 2.0
}

/// Clamp-to-edge bilinear sample, written from the textbook formula.
pub fn bilinear_ref(img: &Image, x: f64, y: f64, c: usize) -> f64 {
    let w = img.width() as i64;
    let h = img.height() as i64;
    let x = x.max(0.0).min((w - 1) as f64);
    let y = y.max(0.0).min((h - 1) as f64);
    let xi = x.floor() as i64;
    let yi = y.floor() as i64;
    let px = |i: i64, j: i64| f64::from(img.get(i.min(w - 1) as usize, j.min(h - 1) as usize, c));
    let (tx, ty) = (x - xi as f64, y - yi as f64);
    (1.0 - tx) * (1.0 - ty) * px(xi, yi)
        + tx * (1.0 - ty) * px(xi + 1, yi)
        + (1.0 - tx) * ty * px(xi, yi + 1)
        + tx * ty * px(xi + 1, yi + 1)
}

/// Per-pixel reference morph: barycentric lookup of the containing target
/// triangle, barycentric transfer to each source, textbook bilinear
/// sampling, blend and round half away from zero.
pub fn scalar_reference_morph(
    img_a: &Image,
    src_a: &[Point2],
    img_b: &Image,
    src_b: &[Point2],
    target: &[Point2],
    triangles: &[morphforge::Triangle],
    beta: f64,
) -> Image {
    let (w, h, ch) = (img_a.width(), img_a.height(), img_a.channels());
    Image::from_fn(w, h, ch, |x, y, c| {
        let (px, py) = (x as f64, y as f64);
        let mut value = None;
        for t in triangles {
            let (p0, p1, p2) = (target[t.a], target[t.b], target[t.c]);
            let det = (p1.y - p2.y) * (p0.x - p2.x) + (p2.x - p1.x) * (p0.y - p2.y);
            let l0 = ((p1.y - p2.y) * (px - p2.x) + (p2.x - p1.x) * (py - p2.y)) / det;
            let l1 = ((p2.y - p0.y) * (px - p2.x) + (p0.x - p2.x) * (py - p2.y)) / det;
            let l2 = 1.0 - l0 - l1;
            if l0 >= -1e-9 && l1 >= -1e-9 && l2 >= -1e-9 {
                let at = |s: &[Point2]| {
                    (
                        l0 * s[t.a].x + l1 * s[t.b].x + l2 * s[t.c].x,
                        l0 * s[t.a].y + l1 * s[t.b].y + l2 * s[t.c].y,
                    )
                };
                let (ax, ay) = at(src_a);
                let (bx, by) = at(src_b);
                value = Some((1.0 - beta) * bilinear_ref(img_a, ax, ay, c) + beta * bilinear_ref(img_b, bx, by, c));
                break;
            }
        }
        let v = value.unwrap_or_else(|| (1.0 - beta) * f64::from(img_a.get(x, y, c)) + beta * f64::from(img_b.get(x, y, c)));
        let r = v.abs().round() * v.signum();
        r.clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

/// Largest per-channel absolute difference.
pub fn max_abs_diff(a: &Image, b: &Image) -> u8 {
    assert_eq!((a.width(), a.height(), a.channels()), (b.width(), b.height(), b.channels()));
    a.data().iter().zip(b.data()).map(|(&x, &y)| x.abs_diff(y)).max().unwrap_or(0)
}

/// Generated 250-per-split corpus, written once per test binary.
pub fn desk_corpus() -> &'static std::path::Path {
    static DIR: std::sync::OnceLock<tempfile::TempDir> = std::sync::OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        morphforge::synth::write_corpus(dir.path(), &morphforge::synth::CorpusSpec::default()).unwrap();
        dir
    })
    .path()
}

/// Desk config for [`desk_corpus`] writing below `out`.
pub fn desk_config(out: &std::path::Path) -> morphforge::pipeline::PipelineConfig {
    let mut cfg = morphforge::pipeline::PipelineConfig::load(desk_corpus().join("desk.toml")).unwrap();
    cfg.out_dir = out.to_path_buf();
    cfg
}

/// Two seeded synthetic faces of the given size.
pub fn face_pair(seed: u64, size: usize) -> ((Image, morphforge::LandmarkSet), (Image, morphforge::LandmarkSet)) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a = morphforge::synth::synth_face(&mut rng, size, 6.0, 0.3);
    (a, morphforge::synth::synth_face(&mut rng, size, 6.0, 0.3))
}

pub struct EndToEnd {
    pub report: morphforge::metrics::MadReport,
    pub epochs: usize,
    pub train_attacks: usize,
    pub test_attacks: usize,
}

/// Pipeline on the desk corpus, baseline training with default
/// hyper-parameters on the train split, scoring of 20 + 20 eval samples.
pub fn desk_end_to_end(out: &std::path::Path) -> EndToEnd {
    use morphforge::baseline::{manifest_samples, score_samples, train, LabeledSample, TrainConfig};

    fn take(samples: &[LabeledSample], attack: bool, n: usize) -> Vec<LabeledSample> {
        samples.iter().filter(|s| s.attack == attack).take(n).cloned().collect()
    }

    let mut cfg = desk_config(out);
    // 100 kept per split: 50 bona fide and 10 x 5 morph pairs
    cfg.keep = 100;
    cfg.n_keys = 10;
    let run = morphforge::pipeline::run_pipeline(&cfg).unwrap();

    let train_all = manifest_samples(&run.train, run.train_path.parent().unwrap()).unwrap();
    let eval_all = manifest_samples(&run.eval, run.eval_path.parent().unwrap()).unwrap();
    let mut train_set = take(&train_all, false, 50);
    train_set.extend(take(&train_all, true, 50));
    let mut test_set = take(&eval_all, false, 20);
    test_set.extend(take(&eval_all, true, 20));

    let tc = TrainConfig::default();
    let samples: Vec<_> = train_set.iter().map(|s| s.to_train_sample(tc.map_rows, tc.map_cols)).collect();
    let outcome = train(&samples, &tc).unwrap();
    let scores = score_samples(&outcome.model, &test_set).unwrap();
    EndToEnd {
        report: morphforge::metrics::MadReport::compute(&scores).unwrap(),
        epochs: outcome.epochs_run(),
        train_attacks: train_set.iter().filter(|s| s.attack).count(),
        test_attacks: test_set.iter().filter(|s| s.attack).count(),
    }
}

/// Validates a serialized report against the bundled schema.
pub fn report_is_schema_valid(json: &str) -> bool {
    let schema: serde_json::Value = serde_json::from_str(morphforge::metrics::REPORT_SCHEMA).unwrap();
    let instance: serde_json::Value = serde_json::from_str(json).unwrap();
    jsonschema::validator_for(&schema).unwrap().is_valid(&instance)
}
