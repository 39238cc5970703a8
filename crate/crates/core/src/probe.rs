//! Evaluation spheres lit by an environment map.
//!
//! The mirror ball is an exact reflection lookup. The diffuse and glossy
//! balls look up prefiltered maps computed by direct summation over every
//! input texel, so each output value has a fixed summation order and the
//! result does not depend on the thread schedule.

use rayon::prelude::*;

use crate::envmap::{solid_angle, Direction, EnvironmentMap};
use crate::error::{Error, Result};
use crate::image::Image;

/// Rows of the prefiltered maps used when rendering probes.
pub const PREFILTER_MAX_HEIGHT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialKind {
    Mirror,
    Matte,
    Diffuse,
}

impl MaterialKind {
    pub const ALL: [MaterialKind; 3] = [
        MaterialKind::Diffuse,
        MaterialKind::Matte,
        MaterialKind::Mirror,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MaterialKind::Mirror => "mirror",
            MaterialKind::Matte => "matte",
            MaterialKind::Diffuse => "diffuse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub kind: MaterialKind,
    pub albedo: [f64; 3],
    /// Phong lobe exponent, used by the matte silver ball only.
    pub exponent: f64,
}

impl Material {
    pub const fn mirror_ball() -> Self {
        Material {
            kind: MaterialKind::Mirror,
            albedo: [1.0; 3],
            exponent: 1.0,
        }
    }

    pub const fn matte_silver() -> Self {
        Material {
            kind: MaterialKind::Matte,
            albedo: [0.9; 3],
            exponent: 64.0,
        }
    }

    pub const fn gray_diffuse() -> Self {
        Material {
            kind: MaterialKind::Diffuse,
            albedo: [0.5; 3],
            exponent: 1.0,
        }
    }

    pub fn default_for(kind: MaterialKind) -> Self {
        match kind {
            MaterialKind::Mirror => Self::mirror_ball(),
            MaterialKind::Matte => Self::matte_silver(),
            MaterialKind::Diffuse => Self::gray_diffuse(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.albedo.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Precondition(format!(
                "albedo {:?} outside [0, 1]",
                self.albedo
            )));
        }
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::Precondition(format!(
                "lobe exponent must be positive, got {}",
                self.exponent
            )));
        }
        Ok(())
    }
}

/// Square render of a sphere; pixels outside the inscribed disc are black.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeImage {
    pub image: Image,
    pub mask: Vec<bool>,
}

impl ProbeImage {
    pub fn size(&self) -> usize {
        self.image.width()
    }
}

/// Flattened texel data for direct summation.
struct Texels {
    dirs: Vec<[f64; 3]>,
    weights: Vec<f64>,
    radiance: Vec<[f64; 3]>,
}

impl Texels {
    fn new(env: &EnvironmentMap) -> Self {
        let (w, h) = (env.width(), env.height());
        let n = w * h;
        let mut texels = Texels {
            dirs: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
            radiance: Vec::with_capacity(n),
        };
        for row in 0..h {
            let d_omega = solid_angle(row, w, h);
            for col in 0..w {
                let p = env.get(col, row);
                texels.dirs.push(env.pixel_direction(col, row).to_array());
                texels.weights.push(d_omega);
                texels.radiance.push([p[0] as f64, p[1] as f64, p[2] as f64]);
            }
        }
        texels
    }
}

fn check_out_height(env: &EnvironmentMap, out_height: usize) -> Result<()> {
    if out_height == 0 || out_height > env.height() {
        return Err(Error::Precondition(format!(
            "prefilter height {out_height} must be in 1..={}",
            env.height()
        )));
    }
    Ok(())
}

fn prefilter_with<F>(env: &EnvironmentMap, out_height: usize, per_direction: F) -> Result<EnvironmentMap>
where
    F: Fn(&Texels, [f64; 3]) -> [f64; 3] + Sync,
{
    check_out_height(env, out_height)?;
    let texels = Texels::new(env);
    let out_width = 2 * out_height;
    let pixels: Vec<_> = (0..out_width * out_height)
        .into_par_iter()
        .map(|i| {
            let n = crate::envmap::pixel_to_direction(i % out_width, i / out_width, out_width, out_height)
                .expect("index within the output grid")
                .to_array();
            let v = per_direction(&texels, n);
            [v[0] as f32, v[1] as f32, v[2] as f32]
        })
        .collect();
    EnvironmentMap::from_pixels(out_width, out_height, pixels)
}

/// Cosine-weighted irradiance `Σ L(ω)·max(0, n·ω)·ΔΩ` for each output direction.
pub fn prefilter_diffuse(env: &EnvironmentMap, out_height: usize) -> Result<EnvironmentMap> {
    prefilter_with(env, out_height, |t, n| {
        let mut acc = [0.0f64; 3];
        for ((d, &w), l) in t.dirs.iter().zip(&t.weights).zip(&t.radiance) {
            let c = n[0] * d[0] + n[1] * d[1] + n[2] * d[2];
            if c > 0.0 {
                let k = c * w;
                acc[0] += l[0] * k;
                acc[1] += l[1] * k;
                acc[2] += l[2] * k;
            }
        }
        acc
    })
}

/// Normalized Phong-lobe average `Σ L·max(0, r·ω)^n·ΔΩ / Σ max(0, r·ω)^n·ΔΩ`.
pub fn prefilter_glossy(env: &EnvironmentMap, exponent: f64, out_height: usize) -> Result<EnvironmentMap> {
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(Error::Precondition(format!(
            "lobe exponent must be positive, got {exponent}"
        )));
    }
    let integral = exponent.fract() == 0.0 && exponent <= i32::MAX as f64;
    prefilter_with(env, out_height, |t, r| {
        let mut acc = [0.0f64; 3];
        let mut norm = 0.0f64;
        for ((d, &w), l) in t.dirs.iter().zip(&t.weights).zip(&t.radiance) {
            let c = r[0] * d[0] + r[1] * d[1] + r[2] * d[2];
            if c > 0.0 {
                let lobe = if integral {
                    c.powi(exponent as i32)
                } else {
                    c.powf(exponent)
                };
                let k = lobe * w;
                acc[0] += l[0] * k;
                acc[1] += l[1] * k;
                acc[2] += l[2] * k;
                norm += k;
            }
        }
        if norm > 0.0 {
            [acc[0] / norm, acc[1] / norm, acc[2] / norm]
        } else {
            [0.0; 3]
        }
    })
}

fn prefilter_height(env: &EnvironmentMap) -> usize {
    env.height().min(PREFILTER_MAX_HEIGHT)
}

/// Lookup map for a material: the environment itself for the mirror ball,
/// otherwise the matching prefiltered map.
fn lighting_for(env: &EnvironmentMap, material: &Material) -> Result<EnvironmentMap> {
    match material.kind {
        MaterialKind::Mirror => Ok(env.clone()),
        MaterialKind::Matte => prefilter_glossy(env, material.exponent, prefilter_height(env)),
        MaterialKind::Diffuse => prefilter_diffuse(env, prefilter_height(env)),
    }
}

fn shade(lighting: &EnvironmentMap, material: &Material, size: usize) -> ProbeImage {
    let mut image = Image::filled(size, size, [0.0; 3]);
    let mut mask = vec![false; size * size];
    let scale = match material.kind {
        MaterialKind::Diffuse => std::f64::consts::FRAC_1_PI,
        _ => 1.0,
    };
    for j in 0..size {
        for i in 0..size {
            let u = 2.0 * (i as f64 + 0.5) / size as f64 - 1.0;
            let v = 1.0 - 2.0 * (j as f64 + 0.5) / size as f64;
            let rr = u * u + v * v;
            if rr >= 1.0 {
                continue;
            }
            mask[j * size + i] = true;
            let nz = (1.0 - rr).sqrt();
            let lookup = match material.kind {
                MaterialKind::Diffuse => Direction { x: u, y: v, z: nz },
                // reflect the eye vector (0, 0, 1) about the normal
                _ => Direction::normalized(2.0 * nz * u, 2.0 * nz * v, 2.0 * nz * nz - 1.0)
                    .expect("reflection of a unit vector"),
            };
            let l = lighting.sample(&lookup);
            let mut out = [0.0f32; 3];
            for ch in 0..3 {
                out[ch] = (material.albedo[ch] * scale * l[ch]) as f32;
            }
            image.set(i, j, out);
        }
    }
    ProbeImage { image, mask }
}

/// Orthographic render of a unit sphere seen along −z.
pub fn render_probe(env: &EnvironmentMap, material: &Material, size: usize) -> Result<ProbeImage> {
    material.validate()?;
    if size < 16 {
        return Err(Error::Precondition(format!("probe size {size} below 16")));
    }
    Ok(shade(&lighting_for(env, material)?, material, size))
}

pub fn render_probe_sequence(
    envs: &[EnvironmentMap],
    material: &Material,
    size: usize,
) -> Result<Vec<ProbeImage>> {
    let first = envs.first().ok_or(Error::Empty("environment sequence"))?;
    if envs
        .iter()
        .any(|e| e.width() != first.width() || e.height() != first.height())
    {
        return Err(Error::DimensionMismatch(
            "sequence frames differ in resolution".into(),
        ));
    }
    envs.iter().map(|e| render_probe(e, material, size)).collect()
}
