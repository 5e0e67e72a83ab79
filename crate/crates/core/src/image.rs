//! 8-bit raster images with a real-valued working buffer.
//!
//! Pixels are addressed by integer coordinates `(x, y)` with the pixel
//! center at the integer position, so a `W x H` image spans
//! `[0, W-1] x [0, H-1]` in continuous coordinates.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("buffer length {len} does not match {width}x{height}x{channels}")]
    BufferSize {
        width: usize,
        height: usize,
        channels: usize,
        len: usize,
    },
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    Channels(usize),
    #[error("empty image")]
    Empty,
    #[error("crop window ({x0},{y0})-({x1},{y1}) is empty or outside the image")]
    CropWindow {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
    },
    #[error("image codec error for {path}: {source}")]
    Codec {
        path: String,
        #[source]
        source: ::image::ImageError,
    },
}

/// Interleaved 8-bit image with 1 (gray) or 3 (RGB) channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if channels != 1 && channels != 3 {
            return Err(ImageError::Channels(channels));
        }
        if width == 0 || height == 0 {
            return Err(ImageError::Empty);
        }
        if data.len() != width * height * channels {
            return Err(ImageError::BufferSize {
                width,
                height,
                channels,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every channel of every pixel set to `value`.
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds an image from a per-pixel closure returning one value per channel.
    pub fn from_fn<F>(width: usize, height: usize, channels: usize, mut f: F) -> Result<Self, ImageError>
    where
        F: FnMut(usize, usize, usize) -> u8,
    {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: u8) {
        self.data[(y * self.width + x) * self.channels + c] = value;
    }

    /// BT.601 luma of a pixel; the raw value for gray images.
    #[inline]
    pub fn luma(&self, x: usize, y: usize) -> f64 {
        let i = (y * self.width + x) * self.channels;
        if self.channels == 1 {
            f64::from(self.data[i])
        } else {
            0.299 * f64::from(self.data[i]) + 0.587 * f64::from(self.data[i + 1]) + 0.114 * f64::from(self.data[i + 2])
        }
    }

    /// Bilinear sample at a continuous position, clamped to the image edge.
    #[inline]
    pub fn sample_bilinear(&self, x: f64, y: f64, c: usize) -> f64 {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, max_x) };
        let y = if y.is_nan() { 0.0 } else { y.clamp(0.0, max_y) };
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let v00 = f64::from(self.get(x0, y0, c));
        let v10 = f64::from(self.get(x1, y0, c));
        let v01 = f64::from(self.get(x0, y1, c));
        let v11 = f64::from(self.get(x1, y1, c));
        let top = v00 + (v10 - v00) * fx;
        let bottom = v01 + (v11 - v01) * fx;
        top + (bottom - top) * fy
    }

    pub fn to_float(&self) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }

    /// Copies the half-open window `[x0, x1) x [y0, y1)`.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<Image, ImageError> {
        if x0 >= x1 || y0 >= y1 || x1 > self.width || y1 > self.height {
            return Err(ImageError::CropWindow { x0, y0, x1, y1 });
        }
        let (w, h) = (x1 - x0, y1 - y0);
        let mut data = Vec::with_capacity(w * h * self.channels);
        for y in y0..y1 {
            let start = (y * self.width + x0) * self.channels;
            data.extend_from_slice(&self.data[start..start + w * self.channels]);
        }
        Image::new(w, h, self.channels, data)
    }

    /// Bilinear resize with pixel-center alignment.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Result<Image, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::Empty);
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut out = FloatImage::zeros(width, height, self.channels);
        for y in 0..height {
            let src_y = (y as f64 + 0.5) * sy - 0.5;
            for x in 0..width {
                let src_x = (x as f64 + 0.5) * sx - 0.5;
                for c in 0..self.channels {
                    out.set(x, y, c, self.sample_bilinear(src_x, src_y, c));
                }
            }
        }
        Ok(out.to_u8())
    }

    /// Gray copy using BT.601 luma (identity for gray images).
    pub fn to_gray(&self) -> Image {
        if self.channels == 1 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                data.push(quantize(self.luma(x, y)));
            }
        }
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Image, ImageError> {
        let path = path.as_ref();
        let decoded = ::image::open(path).map_err(|source| ImageError::Codec {
            path: path.display().to_string(),
            source,
        })?;
        let img = match decoded {
            ::image::DynamicImage::ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                Image::new(w as usize, h as usize, 1, g.into_raw())?
            }
            other => {
                let rgb = other.to_rgb8();
                let (w, h) = rgb.dimensions();
                Image::new(w as usize, h as usize, 3, rgb.into_raw())?
            }
        };
        Ok(img)
    }

    /// Lossless PNG encoding.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        let path = path.as_ref();
        let color = if self.channels == 1 {
            ::image::ExtendedColorType::L8
        } else {
            ::image::ExtendedColorType::Rgb8
        };
        ::image::save_buffer_with_format(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            color,
            ::image::ImageFormat::Png,
        )
        .map_err(|source| ImageError::Codec {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Real-valued image used between warping and final quantization.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FloatImage {
    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: f64) {
        self.data[(y * self.width + x) * self.channels + c] = value;
    }

    /// Rounds half away from zero and clamps to `[0, 255]`.
    pub fn to_u8(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| quantize(v)).collect(),
        }
    }
}

/// Round half away from zero, then clamp to the 8-bit range.
#[inline]
pub fn quantize(value: f64) -> u8 {
    if value.is_nan() {
        return 0;
    }
    value.round().clamp(0.0, 255.0) as u8
}
