//! Plain row-major RGB raster shared by every module.

use crate::error::{Error, Result};

/// Linear RGB triple as stored on disk and in memory.
pub type Rgb = [f32; 3];

/// Row-major RGB image, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Precondition(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: Rgb) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(col, row));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<Rgb> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> Rgb {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: Rgb) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Rgb] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// Applies `f` to every channel value.
    pub fn map_channels(&self, f: impl Fn(f32) -> f32) -> Image {
        Image {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|p| [f(p[0]), f(p[1]), f(p[2])])
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Image {
        self.map_channels(|v| (v as f64 * factor) as f32)
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Bilinear lookup at continuous pixel coordinates (pixel centers at integers).
    ///
    /// Columns wrap around; rows clamp to the first and last row.
    pub fn sample_wrapped(&self, col: f64, row: f64) -> [f64; 3] {
        let w = self.width;
        let row = row.clamp(0.0, (self.height - 1) as f64);
        let r0 = row.floor() as usize;
        let r1 = (r0 + 1).min(self.height - 1);
        let fr = row - r0 as f64;

        let col = col.rem_euclid(w as f64);
        let c0f = col.floor();
        let fc = col - c0f;
        let c0 = (c0f as usize) % w;
        let c1 = (c0 + 1) % w;

        let p00 = self.get(c0, r0);
        let p01 = self.get(c1, r0);
        let p10 = self.get(c0, r1);
        let p11 = self.get(c1, r1);
        let mut out = [0.0; 3];
        for ch in 0..3 {
            let top = p00[ch] as f64 * (1.0 - fc) + p01[ch] as f64 * fc;
            let bottom = p10[ch] as f64 * (1.0 - fc) + p11[ch] as f64 * fc;
            out[ch] = top * (1.0 - fr) + bottom * fr;
        }
        out
    }
}
