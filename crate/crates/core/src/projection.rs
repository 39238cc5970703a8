//! Perspective crops from panoramas, randomized cameras and smooth
//! camera trajectories, plus the training-sample generator built on them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::envmap::{rotate_env, Direction, EnvironmentMap};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::tonemap::{
    apply_display_tonemap, auto_expose, quantize8, tonemap_dual, tonemap_ldr, DualToneMaps,
    ToneCurve, DISPLAY_GAMMA,
};

/// Pinhole camera: yaw `azimuth`, pitch `elevation`, horizontal `fov`, all
/// in degrees. Azimuth 0 looks along −z and increases towards +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub azimuth: f64,
    pub elevation: f64,
    pub fov: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraSpec {
    pub fn new(azimuth: f64, elevation: f64, fov: f64, width: usize, height: usize) -> Result<Self> {
        let cam = CameraSpec {
            azimuth: azimuth.rem_euclid(360.0),
            elevation,
            fov,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov > 0.0 && self.fov < 180.0) {
            return Err(Error::Precondition(format!(
                "fov must be in (0, 180), got {}",
                self.fov
            )));
        }
        if !(self.elevation.abs() < 90.0) {
            return Err(Error::Precondition(format!(
                "elevation must be in (-90, 90), got {}",
                self.elevation
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Precondition("camera resolution must be positive".into()));
        }
        Ok(())
    }

    /// World-space optical axis.
    pub fn forward(&self) -> Direction {
        self.rotate_to_world([0.0, 0.0, -1.0])
    }

    /// World-space ray through continuous image coordinates; pixel `(i, j)`
    /// has its center at `(i + 0.5, j + 0.5)`.
    pub fn ray(&self, x: f64, y: f64) -> Direction {
        let half = (self.fov.to_radians() * 0.5).tan();
        let aspect = self.height as f64 / self.width as f64;
        let cx = (2.0 * x / self.width as f64 - 1.0) * half;
        let cy = (1.0 - 2.0 * y / self.height as f64) * half * aspect;
        self.rotate_to_world([cx, cy, -1.0])
    }

    /// Pitch about camera x by the elevation, then yaw about world y by the azimuth.
    fn rotate_to_world(&self, v: [f64; 3]) -> Direction {
        let (se, ce) = self.elevation.to_radians().sin_cos();
        let (y1, z1) = (v[1] * ce - v[2] * se, v[1] * se + v[2] * ce);
        let (sa, ca) = self.azimuth.to_radians().sin_cos();
        let (x2, z2) = (v[0] * ca - z1 * sa, v[0] * sa + z1 * ca);
        Direction::normalized(x2, y1, z2).expect("camera ray is never zero")
    }

    /// Camera with the same intrinsics looking along `dir`.
    fn looking_along(&self, dir: &Direction) -> CameraSpec {
        CameraSpec {
            azimuth: dir.azimuth().to_degrees().rem_euclid(360.0),
            elevation: dir.y.clamp(-1.0, 1.0).asin().to_degrees(),
            ..*self
        }
    }
}

/// Renders the perspective view of `pano` seen by `cam`.
pub fn project_perspective(pano: &EnvironmentMap, cam: &CameraSpec) -> Image {
    Image::from_fn(cam.width, cam.height, |i, j| {
        let ray = cam.ray(i as f64 + 0.5, j as f64 + 0.5);
        let v = pano.sample(&ray);
        [v[0] as f32, v[1] as f32, v[2] as f32]
    })
}

/// Closed sampling intervals, in degrees, plus the crop resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRanges {
    pub azimuth: (f64, f64),
    pub elevation: (f64, f64),
    pub fov: (f64, f64),
    pub width: usize,
    pub height: usize,
}

impl Default for CameraRanges {
    fn default() -> Self {
        CameraRanges {
            azimuth: (0.0, 360.0),
            elevation: (-10.0, 10.0),
            fov: (45.0, 80.0),
            width: 720,
            height: 480,
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, range: (f64, f64)) -> f64 {
    let u: f64 = rng.random();
    range.0 + (range.1 - range.0) * u
}

pub fn sample_camera<R: Rng + ?Sized>(rng: &mut R, ranges: &CameraRanges) -> Result<CameraSpec> {
    let azimuth = uniform(rng, ranges.azimuth);
    let elevation = uniform(rng, ranges.elevation);
    let fov = uniform(rng, ranges.fov);
    CameraSpec::new(azimuth, elevation, fov, ranges.width, ranges.height)
}

pub const DEFAULT_CONE_DEG: f64 = 15.0;

/// A camera path whose every frame stays within `cone_limit` degrees of
/// the first frame's optical axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub frames: Vec<CameraSpec>,
    pub cone_limit: f64,
}

impl Trajectory {
    /// Largest great-circle angle between frame 0 and any frame, in degrees.
    pub fn max_deviation(&self) -> f64 {
        let f0 = self.frames[0].forward();
        self.frames
            .iter()
            .map(|f| f.forward().angle_deg(&f0))
            .fold(0.0, f64::max)
    }
}

/// Cosine ease-in/ease-out weights over `frame_count` frames.
pub fn easing_schedule(frame_count: usize) -> Vec<f64> {
    if frame_count == 1 {
        return vec![0.0];
    }
    (0..frame_count)
        .map(|k| 0.5 * (1.0 - (PI * k as f64 / (frame_count - 1) as f64).cos()))
        .collect()
}

/// Pans from `start` towards a random orientation inside the cone along a
/// great circle, with cosine easing. FOV and resolution stay fixed.
pub fn gen_trajectory<R: Rng + ?Sized>(
    rng: &mut R,
    frame_count: usize,
    cone_deg: f64,
    start: &CameraSpec,
) -> Result<Trajectory> {
    if frame_count == 0 {
        return Err(Error::Precondition("trajectory needs at least one frame".into()));
    }
    if !(0.0..90.0).contains(&cone_deg) {
        return Err(Error::Precondition(format!(
            "cone must be in [0, 90), got {cone_deg}"
        )));
    }
    start.validate()?;
    let spread = cone_deg.to_radians() * rng.random::<f64>();
    let heading = 2.0 * PI * rng.random::<f64>();

    let f0 = start.forward().to_array();
    // tangent basis at f0: camera right and camera up
    let right = start.ray(start.width as f64, start.height as f64 * 0.5).to_array();
    let right = orthonormalize(right, f0);
    let up = cross(right, f0);
    let axis_dir = [
        heading.cos() * right[0] + heading.sin() * up[0],
        heading.cos() * right[1] + heading.sin() * up[1],
        heading.cos() * right[2] + heading.sin() * up[2],
    ];

    let mut frames = Vec::with_capacity(frame_count);
    for (k, t) in easing_schedule(frame_count).into_iter().enumerate() {
        if k == 0 {
            frames.push(*start);
            continue;
        }
        let a = spread * t;
        let (s, c) = a.sin_cos();
        let d = Direction::normalized(
            c * f0[0] + s * axis_dir[0],
            c * f0[1] + s * axis_dir[1],
            c * f0[2] + s * axis_dir[2],
        )
        .expect("unit combination");
        frames.push(start.looking_along(&d));
    }
    Ok(Trajectory {
        frames,
        cone_limit: cone_deg,
    })
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn orthonormalize(v: [f64; 3], n: [f64; 3]) -> [f64; 3] {
    let d = v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
    let w = [v[0] - d * n[0], v[1] - d * n[1], v[2] - d * n[2]];
    let len = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    [w[0] / len, w[1] / len, w[2] / len]
}

/// Whether a panorama carries linear HDR radiance or display-referred LDR values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicRange {
    Hdr,
    Ldr,
}

/// A source panorama or panorama video (one map per frame).
#[derive(Debug, Clone)]
pub struct PanoSource {
    pub name: String,
    pub range: DynamicRange,
    pub frames: Vec<EnvironmentMap>,
}

impl PanoSource {
    pub fn still(name: impl Into<String>, range: DynamicRange, pano: EnvironmentMap) -> Self {
        PanoSource {
            name: name.into(),
            range,
            frames: vec![pano],
        }
    }

    fn frame(&self, k: usize) -> &EnvironmentMap {
        &self.frames[k % self.frames.len()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetOptions {
    pub cameras: CameraRanges,
    /// `None` for still images, otherwise the number of video frames.
    pub video_frames: Option<usize>,
    pub cone_deg: f64,
    /// Probability that auto-exposure is applied to an HDR crop.
    pub exposure_probability: f64,
    pub exposure_percentile: f64,
    pub exposure_target: f64,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            cameras: CameraRanges::default(),
            video_frames: None,
            cone_deg: DEFAULT_CONE_DEG,
            exposure_probability: 0.5,
            exposure_percentile: 0.99,
            exposure_target: 0.9,
        }
    }
}

/// Lighting supervision for one frame: both channels for HDR sources, the
/// Reinhard channel alone for LDR sources.
#[derive(Debug, Clone, PartialEq)]
pub enum LightingTarget {
    Dual(DualToneMaps),
    LdrOnly(Image),
}

impl LightingTarget {
    pub fn ldr(&self) -> &Image {
        match self {
            LightingTarget::Dual(maps) => maps.ldr(),
            LightingTarget::LdrOnly(img) => img,
        }
    }

    pub fn log(&self) -> Option<&Image> {
        match self {
            LightingTarget::Dual(maps) => Some(maps.log()),
            LightingTarget::LdrOnly(_) => None,
        }
    }
}

/// One supervised sample: LDR crops and the lighting targets, expressed in
/// each frame's camera azimuth (forward at the panorama center).
#[derive(Debug, Clone)]
pub struct Sample {
    pub index: usize,
    pub source: usize,
    pub range: DynamicRange,
    pub cameras: Vec<CameraSpec>,
    /// `None` for LDR sources, whose crops are already display referred.
    pub tone_curve: Option<ToneCurve>,
    pub exposure_scale: f64,
    pub crops: Vec<Image>,
    pub targets: Vec<LightingTarget>,
}

/// Independent RNG for sample `index`: the seed selects the key and the
/// index selects the ChaCha stream, so samples do not depend on order.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Generates sample `index` of the dataset defined by `seed`.
pub fn generate_sample(
    sources: &[PanoSource],
    seed: u64,
    index: usize,
    opts: &DatasetOptions,
) -> Result<Sample> {
    if sources.is_empty() || sources.iter().any(|s| s.frames.is_empty()) {
        return Err(Error::Empty("panorama list"));
    }
    let mut rng = sample_rng(seed, index);
    let source_idx = rng.random_range(0..sources.len());
    let source = &sources[source_idx];
    let start = sample_camera(&mut rng, &opts.cameras)?;
    let cameras = match opts.video_frames {
        Some(n) => gen_trajectory(&mut rng, n, opts.cone_deg, &start)?.frames,
        None => vec![start],
    };

    let mut crops: Vec<Image> = cameras
        .iter()
        .enumerate()
        .map(|(k, cam)| project_perspective(source.frame(k), cam))
        .collect();

    let (tone_curve, exposure_scale) = match source.range {
        DynamicRange::Hdr => {
            let curve = ToneCurve::ALL[rng.random_range(0..ToneCurve::ALL.len())];
            let expose = rng.random::<f64>() < opts.exposure_probability;
            // one scale per clip, measured on the first frame
            let scale = if expose {
                match auto_expose(&crops[0], opts.exposure_percentile, opts.exposure_target) {
                    Ok((s, _)) => s,
                    Err(Error::DegenerateExposure) => 1.0,
                    Err(e) => return Err(e),
                }
            } else {
                1.0
            };
            crops = crops
                .iter()
                .map(|c| quantize8(&apply_display_tonemap(&c.scaled(scale), curve)))
                .collect();
            (Some(curve), scale)
        }
        DynamicRange::Ldr => {
            crops = crops.iter().map(quantize8).collect();
            (None, 1.0)
        }
    };

    let targets = cameras
        .iter()
        .enumerate()
        .map(|(k, cam)| {
            let aligned = rotate_env(source.frame(k), cam.azimuth);
            match source.range {
                DynamicRange::Hdr => LightingTarget::Dual(tonemap_dual(&aligned)),
                DynamicRange::Ldr => LightingTarget::LdrOnly(ldr_pano_target(&aligned)),
            }
        })
        .collect();

    Ok(Sample {
        index,
        source: source_idx,
        range: source.range,
        cameras,
        tone_curve,
        exposure_scale,
        crops,
        targets,
    })
}

/// Reinhard channel of a display-referred panorama, linearized with the
/// display gamma first.
fn ldr_pano_target(pano: &EnvironmentMap) -> Image {
    pano.image().map_channels(|v| {
        let linear = (v as f64).clamp(0.0, 1.0).powf(DISPLAY_GAMMA);
        tonemap_ldr(linear) as f32
    })
}

pub fn dataset_gen(
    sources: &[PanoSource],
    seed: u64,
    count: usize,
    opts: &DatasetOptions,
) -> Result<Vec<Sample>> {
    if sources.is_empty() {
        return Err(Error::Empty("panorama list"));
    }
    (0..count)
        .map(|i| generate_sample(sources, seed, i, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam(az: f64, el: f64, fov: f64) -> CameraSpec {
        CameraSpec::new(az, el, fov, 64, 48).unwrap()
    }

    #[test]
    fn center_ray_is_forward() {
        let c = CameraSpec::new(0.0, 0.0, 70.0, 65, 33).unwrap();
        let r = c.ray(32.5, 16.5);
        assert_eq!(r, Direction::FORWARD);
    }

    #[test]
    fn edge_ray_at_fov_90() {
        let c = cam(0.0, 0.0, 90.0);
        let r = c.ray(0.0, 24.0);
        assert!((r.azimuth().to_degrees() + 45.0).abs() < 1e-12);
        assert!(r.y.abs() < 1e-15);
    }

    #[test]
    fn azimuth_and_elevation_orientation() {
        let f = cam(90.0, 0.0, 60.0).forward();
        assert!((f.x - 1.0).abs() < 1e-12);
        let f = cam(0.0, 30.0, 60.0).forward();
        assert!((f.y - 0.5).abs() < 1e-12 && f.z < 0.0);
    }

    #[test]
    fn invalid_cameras() {
        assert!(CameraSpec::new(0.0, 0.0, 180.0, 4, 4).is_err());
        assert!(CameraSpec::new(0.0, 90.0, 60.0, 4, 4).is_err());
        assert!(CameraSpec::new(0.0, 0.0, 60.0, 0, 4).is_err());
    }

    #[test]
    fn constant_pano_projects_to_constant() {
        let pano = EnvironmentMap::constant(16, [0.3, 0.7, 0.11]).unwrap();
        let img = project_perspective(&pano, &cam(123.0, 7.0, 75.0));
        assert!(img.pixels().iter().all(|p| *p == [0.3, 0.7, 0.11]));
    }

    #[test]
    fn degenerate_fov_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ranges = CameraRanges {
            fov: (60.0, 60.0),
            ..Default::default()
        };
        for _ in 0..100 {
            assert_eq!(sample_camera(&mut rng, &ranges).unwrap().fov, 60.0);
        }
    }

    #[test]
    fn single_frame_trajectory() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let start = cam(10.0, 5.0, 60.0);
        let t = gen_trajectory(&mut rng, 1, 15.0, &start).unwrap();
        assert_eq!(t.frames, vec![start]);
        assert!(gen_trajectory(&mut rng, 0, 15.0, &start).is_err());
    }

    #[test]
    fn easing_accelerates_then_decelerates() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let start = cam(200.0, -4.0, 50.0);
        let t = gen_trajectory(&mut rng, 25, 15.0, &start).unwrap();
        let step = |k: usize| t.frames[k].forward().angle_deg(&t.frames[k - 1].forward());
        assert!(step(1) < step(12));
        assert!(step(24) < step(12));
        assert!(t.frames.iter().all(|f| f.fov == 50.0));
    }

    #[test]
    fn ldr_source_has_no_log_target() {
        let hdr = PanoSource::still(
            "h",
            DynamicRange::Hdr,
            EnvironmentMap::from_fn(8, |c, _| [c as f32; 3]).unwrap(),
        );
        let ldr = PanoSource::still(
            "l",
            DynamicRange::Ldr,
            EnvironmentMap::constant(8, [0.5; 3]).unwrap(),
        );
        let opts = DatasetOptions {
            cameras: CameraRanges {
                width: 12,
                height: 8,
                ..Default::default()
            },
            ..Default::default()
        };
        let samples = dataset_gen(&[hdr, ldr], 5, 16, &opts).unwrap();
        assert!(samples.iter().any(|s| s.range == DynamicRange::Hdr));
        assert!(samples.iter().any(|s| s.range == DynamicRange::Ldr));
        for s in &samples {
            let has_log = s.targets[0].log().is_some();
            assert_eq!(has_log, s.range == DynamicRange::Hdr);
            assert_eq!(s.tone_curve.is_some(), s.range == DynamicRange::Hdr);
        }
        assert!(matches!(
            dataset_gen(&[], 0, 1, &opts),
            Err(Error::Empty(_))
        ));
    }
}
