use serde::{Deserialize, Serialize};

use super::MorphError;
use crate::image::Image;

/// Side length of detector input crops.
pub const MAD_INPUT_SIZE: usize = 224;

/// Fraction of the box width (height) added in total, split evenly over the
/// two sides.
const EXTENSION: f64 = 0.05;

/// Face bounding box in pixels: top-left corner plus size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Self { x, y, width, height }
    }
}

/// Crop window `[x0, x1) x [y0, y1)` after growing `bbox` by 5% of its
/// width and height and clamping to the image.
pub fn extended_crop_window(bbox: &BBox, width: usize, height: usize) -> Result<(usize, usize, usize, usize), MorphError> {
    let (w, h) = (width as f64, height as f64);
    let valid = [bbox.x, bbox.y, bbox.width, bbox.height].iter().all(|v| v.is_finite()) && bbox.width > 0.0 && bbox.height > 0.0;
    let intersects = bbox.x < w && bbox.y < h && bbox.x + bbox.width > 0.0 && bbox.y + bbox.height > 0.0;
    if !valid || !intersects {
        return Err(MorphError::EmptyIntersection { width, height });
    }
    let gx = 0.5 * EXTENSION * bbox.width;
    let gy = 0.5 * EXTENSION * bbox.height;
    let x0 = (bbox.x - gx).floor().max(0.0) as usize;
    let y0 = (bbox.y - gy).floor().max(0.0) as usize;
    let x1 = (bbox.x + bbox.width + gx).ceil().min(w) as usize;
    let y1 = (bbox.y + bbox.height + gy).ceil().min(h) as usize;
    if x0 >= x1 || y0 >= y1 {
        return Err(MorphError::EmptyIntersection { width, height });
    }
    Ok((x0, y0, x1, y1))
}

/// Extended face crop resized to `size x size` by bilinear resampling.
pub fn crop_extended(image: &Image, bbox: &BBox, size: usize) -> Result<Image, MorphError> {
    let (x0, y0, x1, y1) = extended_crop_window(bbox, image.width(), image.height())?;
    let cropped = image.crop(x0, y0, x1, y1)?;
    Ok(cropped.resize_bilinear(size, size)?)
}
