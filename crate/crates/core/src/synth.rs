//! Procedural faces with 68-point landmarks.
//!
//! Stands in for generated face images and a landmark detector in tests,
//! demos and the desk-scale corpus. Faces are simple shaded shapes with
//! per-pixel sensor noise; landmark positions follow the usual 68-point
//! ordering (jaw, brows, nose, eyes, lips).

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::image::{quantize, Image};
use crate::morph::{LandmarkSet, MorphError};
use crate::pipeline::PipelineConfig;
use crate::rng;

/// Shape and color parameters of one synthetic identity. Lengths are in
/// pixels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub size: usize,
    pub cx: f64,
    pub cy: f64,
    pub face_w: f64,
    pub face_h: f64,
    pub eye_dx: f64,
    pub eye_y: f64,
    pub eye_w: f64,
    pub eye_h: f64,
    pub brow_lift: f64,
    pub nose_len: f64,
    pub nose_w: f64,
    pub mouth_dy: f64,
    pub mouth_w: f64,
    pub mouth_h: f64,
    pub open_mouth: bool,
    pub skin: [f64; 3],
    pub background: [f64; 3],
    pub iris: [f64; 3],
    pub lip: [f64; 3],
}

impl FaceSpec {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, size: usize, open_mouth_rate: f64) -> Self {
        let s = size as f64;
        let mut u = |lo: f64, hi: f64| rng.gen_range(lo..hi);
        let cx = s * (0.5 + u(-0.03, 0.03));
        let cy = s * (0.52 + u(-0.03, 0.03));
        let spec = FaceSpec {
            size,
            cx,
            cy,
            face_w: s * u(0.26, 0.32),
            face_h: s * u(0.33, 0.40),
            eye_dx: s * u(0.11, 0.14),
            eye_y: cy - s * u(0.10, 0.14),
            eye_w: s * u(0.05, 0.065),
            eye_h: s * u(0.018, 0.028),
            brow_lift: s * u(0.06, 0.08),
            nose_len: s * u(0.13, 0.17),
            nose_w: s * u(0.035, 0.05),
            mouth_dy: s * u(0.08, 0.11),
            mouth_w: s * u(0.08, 0.11),
            mouth_h: s * u(0.025, 0.035),
            open_mouth: false,
            skin: [u(150.0, 235.0), u(110.0, 190.0), u(90.0, 160.0)],
            background: [u(40.0, 220.0), u(40.0, 220.0), u(40.0, 220.0)],
            iris: [u(40.0, 120.0), u(50.0, 130.0), u(40.0, 140.0)],
            lip: [u(150.0, 210.0), u(70.0, 110.0), u(80.0, 120.0)],
        };
        FaceSpec {
            open_mouth: rng.gen_bool(open_mouth_rate.clamp(0.0, 1.0)),
            ..spec
        }
    }

    fn jaw_top(&self) -> f64 {
        self.cy - 0.04 * self.size as f64
    }

    fn nose_tip_y(&self) -> f64 {
        self.eye_y + self.nose_len
    }

    fn mouth_center(&self) -> (f64, f64) {
        (self.cx, self.nose_tip_y() + self.mouth_dy)
    }

    fn inner_mouth_h(&self) -> f64 {
        if self.open_mouth {
            0.6 * self.mouth_h
        } else {
            0.15 * self.mouth_h
        }
    }

    /// The 68 landmark positions.
    pub fn landmarks(&self) -> LandmarkSet {
        let s = self.size as f64;
        let mut pts = Vec::with_capacity(68);

        // jaw 0..17: left ear, chin, right ear
        let jaw_top = self.jaw_top();
        for i in 0..17 {
            let t = PI * i as f64 / 16.0;
            pts.push(Point2::new(self.cx - self.face_w * t.cos(), jaw_top + 0.9 * self.face_h * t.sin()));
        }
        // brows 17..27
        for side in [-1.0, 1.0] {
            let ex = self.cx + side * self.eye_dx;
            for i in 0..5 {
                let f = i as f64 / 4.0;
                let x = if side < 0.0 {
                    ex - 1.1 * self.eye_w + 2.1 * self.eye_w * f
                } else {
                    ex - 1.0 * self.eye_w + 2.1 * self.eye_w * f
                };
                let arch = (PI * f).sin() * 0.02 * s;
                pts.push(Point2::new(x, self.eye_y - self.brow_lift - arch));
            }
        }
        // nose bridge 27..31, nostrils 31..36
        for i in 0..4 {
            let y = self.eye_y + 0.01 * s + (self.nose_len - 0.01 * s) * i as f64 / 3.0;
            pts.push(Point2::new(self.cx, y));
        }
        let ny = self.nose_tip_y() + 0.02 * s;
        for (i, f) in [-1.0, -0.5, 0.0, 0.5, 1.0].into_iter().enumerate() {
            let dip = if i == 2 { 0.01 * s } else { 0.0 };
            pts.push(Point2::new(self.cx + f * self.nose_w, ny + dip));
        }
        // eyes 36..48
        for side in [-1.0, 1.0] {
            let ex = self.cx + side * self.eye_dx;
            for i in 0..6 {
                let t = PI - 2.0 * PI * i as f64 / 6.0;
                pts.push(Point2::new(ex + self.eye_w * t.cos(), self.eye_y - self.eye_h * t.sin()));
            }
        }
        // lips: outer 48..60, inner 60..68
        let (mx, my) = self.mouth_center();
        for i in 0..12 {
            let t = PI - 2.0 * PI * i as f64 / 12.0;
            pts.push(Point2::new(mx + self.mouth_w * t.cos(), my - self.mouth_h * t.sin()));
        }
        let ih = self.inner_mouth_h();
        for i in 0..8 {
            let t = PI - 2.0 * PI * i as f64 / 8.0;
            pts.push(Point2::new(mx + 0.75 * self.mouth_w * t.cos(), my - ih * t.sin()));
        }

        LandmarkSet {
            image: None,
            width: self.size,
            height: self.size,
            points: pts,
        }
    }

    /// Renders the face with additive Gaussian noise of `noise_sigma` per
    /// channel.
    pub fn render<R: Rng + ?Sized>(&self, noise_sigma: f64, rng: &mut R) -> Image {
        let s = self.size as f64;
        let lm = self.landmarks();
        let noise = Normal::new(0.0, noise_sigma.max(0.0)).expect("finite sigma");
        let jaw_top = self.jaw_top();
        let forehead = jaw_top - (self.eye_y - self.brow_lift - 0.12 * s);
        let (mx, my) = self.mouth_center();
        let inner_h = self.inner_mouth_h();
        let brows: Vec<Point2> = lm.points[17..27].to_vec();
        let pupil = [20.0, 15.0, 15.0];

        let mut data = Vec::with_capacity(self.size * self.size * 3);
        for y in 0..self.size {
            for x in 0..self.size {
                let (px, py) = (x as f64, y as f64);
                let shade = 1.0 - 0.25 * py / s;
                let mut color = self.background.map(|c| c * shade);

                let dx = (px - self.cx) / self.face_w;
                let ry = if py >= jaw_top { 0.9 * self.face_h } else { forehead };
                let dy = (py - jaw_top) / ry;
                if dx * dx + dy * dy <= 1.0 {
                    let light = 1.0 - 0.18 * dx * dx;
                    color = self.skin.map(|c| c * light);

                    if brows.windows(2).take(4).chain(brows[5..].windows(2)).any(|w| seg_dist(px, py, &w[0], &w[1]) < 0.012 * s) {
                        color = [60.0, 45.0, 35.0];
                    }
                    for side in [-1.0, 1.0] {
                        let ex = self.cx + side * self.eye_dx;
                        let (ux, uy) = ((px - ex) / self.eye_w, (py - self.eye_y) / self.eye_h);
                        if ux * ux + uy * uy <= 1.0 {
                            let r = (px - ex).hypot(py - self.eye_y);
                            color = if r < 0.45 * self.eye_h {
                                pupil
                            } else if r < 0.9 * self.eye_h {
                                self.iris
                            } else {
                                [235.0, 235.0, 230.0]
                            };
                        }
                    }
                    if (px - self.cx).abs() < 0.006 * s && py > self.eye_y && py < self.nose_tip_y() {
                        color = color.map(|c| c * 0.85);
                    }
                    for side in [-0.5, 0.5] {
                        let nx = self.cx + side * self.nose_w;
                        let ny = self.nose_tip_y() + 0.02 * s;
                        if (px - nx).hypot(py - ny) < 0.012 * s {
                            color = color.map(|c| c * 0.6);
                        }
                    }
                    let (ox, oy) = ((px - mx) / self.mouth_w, (py - my) / self.mouth_h);
                    if ox * ox + oy * oy <= 1.0 {
                        color = self.lip;
                        let (ix, iy) = ((px - mx) / (0.75 * self.mouth_w), (py - my) / inner_h);
                        if ix * ix + iy * iy <= 1.0 {
                            color = if self.open_mouth { [8.0, 4.0, 4.0] } else { self.lip.map(|c| c * 0.7) };
                        }
                    }
                }
                for c in color {
                    data.push(quantize(c + noise.sample(rng)));
                }
            }
        }
        Image::new(self.size, self.size, 3, data).expect("buffer sized for the frame")
    }
}

fn seg_dist(px: f64, py: f64, a: &Point2, b: &Point2) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - a.x) * vx + (py - a.y) * vy) / len2).clamp(0.0, 1.0)
    };
    (px - a.x - t * vx).hypot(py - a.y - t * vy)
}

/// One random face and its landmarks.
pub fn synth_face<R: Rng + ?Sized>(rng: &mut R, size: usize, noise_sigma: f64, open_mouth_rate: f64) -> (Image, LandmarkSet) {
    let spec = FaceSpec::random(rng, size, open_mouth_rate);
    let img = spec.render(noise_sigma, rng);
    (img, spec.landmarks())
}

/// Parameters of a generated two-split corpus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub per_split: usize,
    pub size: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    pub open_mouth_rate: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            per_split: 250,
            size: 128,
            seed: 7,
            noise_sigma: 6.0,
            open_mouth_rate: 0.3,
        }
    }
}

/// Writes `train/` and `eval/` (images, landmarks, quality.csv) below `root`
/// plus a `desk.toml` pipeline config pointing at them. Returns the config
/// path.
pub fn write_corpus(root: &Path, spec: &CorpusSpec) -> Result<PathBuf, MorphError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| MorphError::Io { path, source }
    };
    for split in ["train", "eval"] {
        let images = root.join(split).join("images");
        let landmarks = root.join(split).join("landmarks");
        fs::create_dir_all(&images).map_err(io(&images))?;
        fs::create_dir_all(&landmarks).map_err(io(&landmarks))?;

        let mut rng = rng::stream(spec.seed, &format!("synth/{split}"));
        let quality_path = root.join(split).join("quality.csv");
        let mut quality = String::from("image_id,quality\n");
        for i in 0..spec.per_split {
            let id = format!("{split}_{i:05}");
            let (img, lm) = synth_face(&mut rng, spec.size, spec.noise_sigma, spec.open_mouth_rate);
            img.save(images.join(format!("{id}.png")))?;
            lm.with_image(format!("{id}.png")).save(landmarks.join(format!("{id}.json")))?;
            let q: f64 = rng.gen_range(0.0..1.0);
            quality.push_str(&format!("{id},{q:.6}\n"));
        }
        fs::write(&quality_path, quality).map_err(io(&quality_path))?;
    }

    let config = PipelineConfig::desk_scale(spec.seed);
    let path = root.join("desk.toml");
    let mut f = fs::File::create(&path).map_err(io(&path))?;
    f.write_all(config.to_toml().as_bytes()).map_err(io(&path))?;
    Ok(path)
}
