//! Equirectangular environment maps and the spherical geometry behind them.
//!
//! Convention: row 0 is the north pole (+y), column centers sweep azimuth
//! φ from −π to π, and φ = 0 is the camera forward axis (−z). A pixel at
//! polar angle θ and azimuth φ looks along `(sinθ·sinφ, cosθ, −sinθ·cosφ)`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::image::{Image, Rgb};

/// Unit vector in camera coordinates (+x right, +y up, −z forward).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Direction {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Direction {
    pub const FORWARD: Direction = Direction {
        x: 0.0,
        y: 0.0,
        z: -1.0,
    };
    pub const UP: Direction = Direction {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };

    /// Normalizes `(x, y, z)`. Returns `None` for a zero or non-finite vector.
    pub fn normalized(x: f64, y: f64, z: f64) -> Option<Direction> {
        let n = (x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return None;
        }
        Some(Direction {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Direction for polar angle `theta` (from +y) and azimuth `phi` (from −z towards +x).
    pub fn from_spherical(theta: f64, phi: f64) -> Direction {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Direction {
            x: st * sp,
            y: ct,
            z: -st * cp,
        }
    }

    #[inline]
    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Azimuth in radians, in (−π, π].
    pub fn azimuth(&self) -> f64 {
        self.x.atan2(-self.z)
    }

    /// Great-circle angle to `other`, in degrees.
    pub fn angle_deg(&self, other: &Direction) -> f64 {
        let cx = self.y * other.z - self.z * other.y;
        let cy = self.z * other.x - self.x * other.z;
        let cz = self.x * other.y - self.y * other.x;
        let sin = (cx * cx + cy * cy + cz * cz).sqrt();
        sin.atan2(self.dot(other)).to_degrees()
    }

    /// The same physical direction expressed in a frame turned by `yaw_deg`
    /// about +y, matching [`rotate_env`]: azimuth decreases by `yaw_deg`.
    pub fn yawed(&self, yaw_deg: f64) -> Direction {
        let (s, c) = yaw_deg.to_radians().sin_cos();
        Direction {
            x: self.x * c + self.z * s,
            y: self.y,
            z: self.z * c - self.x * s,
        }
    }
}

/// Per-pixel unit directions laid out like an [`EnvironmentMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMap {
    width: usize,
    height: usize,
    directions: Vec<Direction>,
}

impl DirectionMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn get(&self, col: usize, row: usize) -> Direction {
        self.directions[row * self.width + col]
    }

    /// Stores the map as an image whose channels hold `(x, y, z)`.
    pub fn to_image(&self) -> Image {
        Image::from_fn(self.width, self.height, |c, r| {
            let d = self.get(c, r);
            [d.x as f32, d.y as f32, d.z as f32]
        })
    }
}

/// Equirectangular HDR radiance map with `width == 2 * height`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentMap {
    image: Image,
}

impl EnvironmentMap {
    /// Validates shape and radiance (finite, non-negative).
    pub fn new(image: Image) -> Result<Self> {
        check_equirect(image.width(), image.height())?;
        for (i, p) in image.pixels().iter().enumerate() {
            if let Some(&value) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidRadiance {
                    col: i % image.width(),
                    row: i / image.width(),
                    value,
                });
            }
        }
        Ok(Self { image })
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        Self::new(Image::new(width, height, pixels)?)
    }

    pub fn constant(height: usize, value: Rgb) -> Result<Self> {
        Self::new(Image::filled(2 * height, height, value))
    }

    pub fn from_fn(height: usize, f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        Self::new(Image::from_fn(2 * height, height, f))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.image.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.image.height()
    }

    #[inline]
    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn into_image(self) -> Image {
        self.image
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> Rgb {
        self.image.get(col, row)
    }

    pub fn pixel_direction(&self, col: usize, row: usize) -> Direction {
        center_direction(col, row, self.width(), self.height())
    }

    /// Bilinear radiance lookup along `dir`.
    pub fn sample(&self, dir: &Direction) -> [f64; 3] {
        let (col, row) = direction_to_pixel(dir, self.width(), self.height());
        self.image.sample_wrapped(col, row)
    }

    pub fn scaled(&self, factor: f64) -> EnvironmentMap {
        assert!(factor >= 0.0 && factor.is_finite());
        EnvironmentMap {
            image: self.image.scaled(factor),
        }
    }

    /// Per-channel sums in f64.
    pub fn channel_sums(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for p in self.image.pixels() {
            for ch in 0..3 {
                s[ch] += p[ch] as f64;
            }
        }
        s
    }
}

fn check_equirect(width: usize, height: usize) -> Result<()> {
    if height == 0 || width != 2 * height {
        return Err(Error::NotEquirect { width, height });
    }
    Ok(())
}

#[inline]
fn center_direction(col: usize, row: usize, width: usize, height: usize) -> Direction {
    let phi = 2.0 * PI * (col as f64 + 0.5) / width as f64 - PI;
    let theta = PI * (row as f64 + 0.5) / height as f64;
    Direction::from_spherical(theta, phi)
}

/// Direction through the center of pixel `(col, row)`.
pub fn pixel_to_direction(col: usize, row: usize, width: usize, height: usize) -> Result<Direction> {
    check_equirect(width, height)?;
    if col >= width || row >= height {
        return Err(Error::Precondition(format!(
            "pixel ({col}, {row}) outside {width}x{height} map"
        )));
    }
    Ok(center_direction(col, row, width, height))
}

/// Continuous pixel coordinates of `dir`; integer values land on pixel centers.
///
/// The column is wrapped into `[0, width)`. The row is clamped to
/// `[0, height − 1]`, and at the poles (no defined azimuth) the column is
/// `width / 2`.
pub fn direction_to_pixel(dir: &Direction, width: usize, height: usize) -> (f64, f64) {
    let w = width as f64;
    let h = height as f64;
    let theta = dir.y.clamp(-1.0, 1.0).acos();
    let row = (theta * h / PI - 0.5).clamp(0.0, h - 1.0);
    let col = if dir.x == 0.0 && dir.z == 0.0 {
        w / 2.0
    } else {
        let c = (dir.azimuth() + PI) * w / (2.0 * PI) - 0.5;
        if c < 0.0 {
            c + w
        } else if c >= w {
            c - w
        } else {
            c
        }
    };
    (col, row)
}

/// Solid angle in steradians covered by any pixel of `row`.
///
/// Rows are mirrored about the equator before evaluation so that the
/// northern and southern halves agree bit for bit.
pub fn solid_angle(row: usize, width: usize, height: usize) -> f64 {
    assert!(row < height, "row {row} outside map of height {height}");
    let r = row.min(height - 1 - row) as f64;
    let h = height as f64;
    let top = PI * r / h;
    let bottom = PI * (r + 1.0) / h;
    // cos(top) − cos(bottom) without cancellation near the poles
    let band = 2.0 * ((top + bottom) * 0.5).sin() * ((bottom - top) * 0.5).sin();
    2.0 * PI / width as f64 * band
}

/// Rotates the panorama about the vertical axis.
///
/// The result is the map seen from a camera turned by `yaw_deg`: content at
/// azimuth φ moves to φ − yaw. Yaws that shift by a whole number of columns
/// are a column roll; others resample each row linearly with wraparound.
pub fn rotate_env(env: &EnvironmentMap, yaw_deg: f64) -> EnvironmentMap {
    EnvironmentMap {
        image: rotate_columns(&env.image, yaw_deg),
    }
}

fn rotate_columns(img: &Image, yaw_deg: f64) -> Image {
    let w = img.width();
    let shift = yaw_deg * w as f64 / 360.0;
    if let Some(k) = integral_shift(shift, w) {
        return Image::from_fn(w, img.height(), |c, r| img.get((c + k) % w, r));
    }
    Image::from_fn(w, img.height(), |c, r| {
        let v = img.sample_wrapped(c as f64 + shift, r as f64);
        [v[0] as f32, v[1] as f32, v[2] as f32]
    })
}

/// Column offset in `[0, width)` when `shift` is a whole number of columns.
fn integral_shift(shift: f64, width: usize) -> Option<usize> {
    let rounded = shift.round();
    if (shift - rounded).abs() > 1e-9 {
        return None;
    }
    Some((rounded as i64).rem_euclid(width as i64) as usize)
}

/// Per-pixel camera-space directions, offset in azimuth by `yaw_deg` with the
/// same sense as [`rotate_env`].
pub fn gen_direction_map(width: usize, height: usize, yaw_deg: f64) -> Result<DirectionMap> {
    check_equirect(width, height)?;
    let shift = yaw_deg * width as f64 / 360.0;
    let mut directions = Vec::with_capacity(width * height);
    match integral_shift(shift, width) {
        Some(k) => {
            for row in 0..height {
                for col in 0..width {
                    directions.push(center_direction((col + k) % width, row, width, height));
                }
            }
        }
        None => {
            let yaw = yaw_deg.to_radians();
            for row in 0..height {
                let theta = PI * (row as f64 + 0.5) / height as f64;
                for col in 0..width {
                    let phi = 2.0 * PI * (col as f64 + 0.5) / width as f64 - PI + yaw;
                    directions.push(Direction::from_spherical(theta, phi));
                }
            }
        }
    }
    Ok(DirectionMap {
        width,
        height,
        directions,
    })
}

/// Rec.709 luminance of linear RGB.
#[inline]
pub fn luminance(rgb: Rgb) -> f64 {
    0.2126 * rgb[0] as f64 + 0.7152 * rgb[1] as f64 + 0.0722 * rgb[2] as f64
}

pub const DEFAULT_PEAK_PERCENTILE: f64 = 0.999;

/// Dominant light direction.
///
/// Finds the solid-angle-weighted luminance percentile, then averages the
/// directions of all pixels at or above it, weighted by luminance times
/// solid angle.
pub fn peak_direction(env: &EnvironmentMap, percentile: f64) -> Result<Direction> {
    if !(0.0..=1.0).contains(&percentile) {
        return Err(Error::Precondition(format!(
            "percentile must be in [0, 1], got {percentile}"
        )));
    }
    let (w, h) = (env.width(), env.height());
    let row_weights: Vec<f64> = (0..h).map(|r| solid_angle(r, w, h)).collect();

    let mut entries: Vec<(f64, usize)> = env
        .image
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, p)| (luminance(*p), i))
        .collect();
    if !entries.iter().any(|(l, _)| *l > 0.0) {
        return Err(Error::NoPeak);
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let total: f64 = row_weights.iter().sum::<f64>() * w as f64;
    let target = percentile * total;
    let mut cumulative = 0.0;
    let mut threshold = entries[entries.len() - 1].0;
    for &(lum, i) in &entries {
        cumulative += row_weights[i / w];
        if cumulative >= target {
            threshold = lum;
            break;
        }
    }

    let mut acc = [0.0f64; 3];
    for &(lum, i) in entries.iter().rev() {
        if lum.partial_cmp(&threshold) == Some(Ordering::Less) {
            break;
        }
        let weight = lum * row_weights[i / w];
        let d = center_direction(i % w, i / w, w, h);
        acc[0] += weight * d.x;
        acc[1] += weight * d.y;
        acc[2] += weight * d.z;
    }
    Direction::normalized(acc[0], acc[1], acc[2]).ok_or(Error::NoPeak)
}
