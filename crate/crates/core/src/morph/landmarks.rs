use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MorphError;
use crate::geometry::Point2;

/// Points in the common 68-point facial layout.
pub const CANONICAL_POINTS: usize = 68;
/// Outer and inner lip points of the 68-point layout.
pub const MOUTH_RANGE: Range<usize> = 48..68;

/// Ordered facial landmarks of one image.
#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkSet {
    pub image: Option<String>,
    pub width: usize,
    pub height: usize,
    pub points: Vec<Point2>,
}

#[derive(Serialize, Deserialize)]
struct LandmarkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image: Option<String>,
    width: usize,
    height: usize,
    points: Vec<[f64; 2]>,
}

impl LandmarkSet {
    pub fn new(width: usize, height: usize, points: Vec<Point2>) -> Result<Self, MorphError> {
        let set = Self {
            image: None,
            width,
            height,
            points,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn with_image(mut self, name: impl Into<String>) -> Self {
        self.image = Some(name.into());
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// All points finite and inside `[0, width) x [0, height)`.
    pub fn validate(&self) -> Result<(), MorphError> {
        if self.width == 0 || self.height == 0 {
            return Err(MorphError::InvalidLandmarks("zero image dimension".into()));
        }
        for (i, p) in self.points.iter().enumerate() {
            let inside = p.is_finite() && p.x >= 0.0 && p.y >= 0.0 && p.x < self.width as f64 && p.y < self.height as f64;
            if !inside {
                return Err(MorphError::InvalidLandmarks(format!(
                    "point {i} ({}, {}) outside {}x{}",
                    p.x, p.y, self.width, self.height
                )));
            }
        }
        Ok(())
    }

    /// Axis-aligned bounds `(min_x, min_y, max_x, max_y)` of a point range.
    pub fn bounds(&self, range: Range<usize>) -> Option<(f64, f64, f64, f64)> {
        let pts = self.points.get(range)?;
        if pts.is_empty() {
            return None;
        }
        Some(pts.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
        ))
    }

    pub fn to_json(&self) -> String {
        let file = LandmarkFile {
            image: self.image.clone(),
            width: self.width,
            height: self.height,
            points: self.points.iter().map(|p| [p.x, p.y]).collect(),
        };
        serde_json::to_string_pretty(&file).expect("landmark file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let file: LandmarkFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let set = LandmarkSet {
            image: file.image,
            width: file.width,
            height: file.height,
            points: file.points.into_iter().map(|[x, y]| Point2::new(x, y)).collect(),
        };
        set.validate().map_err(|e| e.to_string())?;
        Ok(set)
    }

    /// Parses whitespace-separated `x y` lines, one point per line. Blank
    /// lines and `#` comments are skipped.
    pub fn from_xy_lines(text: &str, width: usize, height: usize) -> Result<Self, String> {
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [x, y] = fields[..] else {
                return Err(format!("line {}: expected 2 fields, got {}", n + 1, fields.len()));
            };
            let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", n + 1));
            points.push(Point2::new(parse(x)?, parse(y)?));
        }
        LandmarkSet::new(width, height, points).map_err(|e| e.to_string())
    }

    /// Loads a JSON landmark file, or an `x y` line file when `dims` supplies
    /// the image size.
    pub fn load(path: impl AsRef<Path>, dims: Option<(usize, usize)>) -> Result<Self, MorphError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| MorphError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |reason: String| MorphError::Parse {
            path: path.to_path_buf(),
            reason,
        };
        if text.trim_start().starts_with('{') {
            let set = Self::from_json(&text).map_err(parse_err)?;
            if let Some((w, h)) = dims {
                if (w, h) != (set.width, set.height) {
                    return Err(MorphError::DimensionMismatch(set.width, set.height, w, h));
                }
            }
            Ok(set)
        } else {
            let (w, h) = dims.ok_or_else(|| parse_err("point-list file needs the image dimensions".into()))?;
            Self::from_xy_lines(&text, w, h).map_err(parse_err)
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MorphError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| MorphError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Four corners and four edge midpoints of a `width x height` frame.
pub fn boundary_points(width: usize, height: usize) -> [Point2; 8] {
    let (r, b) = ((width - 1) as f64, (height - 1) as f64);
    [
        Point2::new(0.0, 0.0),
        Point2::new(r, 0.0),
        Point2::new(r, b),
        Point2::new(0.0, b),
        Point2::new(r / 2.0, 0.0),
        Point2::new(r, b / 2.0),
        Point2::new(r / 2.0, b),
        Point2::new(0.0, b / 2.0),
    ]
}
