//! Dual tonemapped lighting encoding, its analytic inverse, display tone
//! curves, auto-exposure and 8-bit quantization.

use std::fmt;
use std::str::FromStr;

use crate::envmap::{luminance, EnvironmentMap};
use crate::error::{Error, Result};
use crate::image::Image;

/// Radiance that the Reinhard channel maps to exactly 1.
pub const M_LDR: f64 = 16.0;
/// Radiance that the log channel maps to exactly 1.
pub const M_LOG: f64 = 10_000.0;

/// Below this radiance the inverse trusts the Reinhard channel alone.
const BLEND_START: f64 = 8.0;
/// Above this radiance the inverse trusts the log channel alone.
const BLEND_END: f64 = 16.0;

/// Extended Reinhard curve `E/(1+E)·(1+E/M²)`, unclipped.
#[inline]
pub fn reinhard_extended(e: f64) -> f64 {
    // written as E·(1+E/M²)/(1+E) so that E = M evaluates to exactly 1
    e * (1.0 + e / (M_LDR * M_LDR)) / (1.0 + e)
}

/// Normalized log curve `log(1+E)/log(1+M)`, unclipped.
#[inline]
pub fn log_normalized(e: f64) -> f64 {
    e.ln_1p() / M_LOG.ln_1p()
}

#[inline]
pub fn tonemap_ldr(e: f64) -> f64 {
    reinhard_extended(e).clamp(0.0, 1.0)
}

#[inline]
pub fn tonemap_log(e: f64) -> f64 {
    log_normalized(e).clamp(0.0, 1.0)
}

/// Positive root of the extended Reinhard curve for a channel value in `[0, 1]`.
#[inline]
pub fn inverse_reinhard(ldr: f64) -> f64 {
    let b = 1.0 - ldr;
    let a4 = 4.0 / (M_LDR * M_LDR);
    // rationalized quadratic formula, stable for small ldr
    2.0 * ldr / (b + (b * b + a4 * ldr).sqrt())
}

#[inline]
pub fn inverse_log(log: f64) -> f64 {
    (log * M_LOG.ln_1p()).exp_m1()
}

/// Rule-based fusion of one channel pair.
///
/// Uses the Reinhard inverse below 8, the log inverse above 16 and a linear
/// blend in between, with the blend weight driven by the log estimate.
pub fn inverse_rule(ldr: f64, log: f64) -> f64 {
    let from_reinhard = inverse_reinhard(ldr);
    let from_log = inverse_log(log);
    let w = ((from_log - BLEND_START) / (BLEND_END - BLEND_START)).clamp(0.0, 1.0);
    (1.0 - w) * from_reinhard + w * from_log
}

/// The `(ldr, log)` pair of tonemapped images, both clipped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualToneMaps {
    ldr: Image,
    log: Image,
}

impl DualToneMaps {
    pub fn new(ldr: Image, log: Image) -> Result<Self> {
        if !ldr.same_shape(&log) {
            return Err(Error::DimensionMismatch(format!(
                "ldr is {}x{}, log is {}x{}",
                ldr.width(),
                ldr.height(),
                log.width(),
                log.height()
            )));
        }
        for img in [&ldr, &log] {
            if let Some(v) = img
                .pixels()
                .iter()
                .flatten()
                .find(|v| !(0.0..=1.0).contains(*v))
            {
                return Err(Error::Precondition(format!(
                    "tonemapped value {v} outside [0, 1]"
                )));
            }
        }
        Ok(Self { ldr, log })
    }

    pub fn ldr(&self) -> &Image {
        &self.ldr
    }

    pub fn log(&self) -> &Image {
        &self.log
    }

    pub fn width(&self) -> usize {
        self.ldr.width()
    }

    pub fn height(&self) -> usize {
        self.ldr.height()
    }

    pub fn quantized(&self) -> DualToneMaps {
        DualToneMaps {
            ldr: quantize8(&self.ldr),
            log: quantize8(&self.log),
        }
    }
}

pub fn tonemap_dual(env: &EnvironmentMap) -> DualToneMaps {
    let img = env.image();
    DualToneMaps {
        ldr: img.map_channels(|v| tonemap_ldr(v as f64) as f32),
        log: img.map_channels(|v| tonemap_log(v as f64) as f32),
    }
}

/// Per-pixel rule-based reconstruction of an environment map.
pub fn inverse_rule_image(maps: &DualToneMaps) -> Result<EnvironmentMap> {
    let pixels = maps
        .ldr
        .pixels()
        .iter()
        .zip(maps.log.pixels())
        .map(|(l, g)| {
            let mut out = [0.0f32; 3];
            for ch in 0..3 {
                out[ch] = inverse_rule(l[ch] as f64, g[ch] as f64) as f32;
            }
            out
        })
        .collect();
    EnvironmentMap::from_pixels(maps.width(), maps.height(), pixels)
}

/// Display tone curves used to turn HDR crops into LDR training inputs.
///
/// Each curve maps 0 to 0, is monotone non-decreasing, and its output is
/// clipped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToneCurve {
    /// Plain `x^(1/2.4)` display encoding.
    Gamma24,
    /// Narkowicz's fit of the ACES reference rendering transform
    /// (`a=2.51, b=0.03, c=2.43, d=0.59, e=0.14`), then 1/2.4 encoding.
    Aces,
    /// Hable's filmic curve (`A=0.15, B=0.50, C=0.10, D=0.20, E=0.02,
    /// F=0.30`, exposure bias 2, white point 11.2), then 1/2.4 encoding.
    Filmic,
    /// Log2 encoding over `[-12.47393, 4.026069]` EV followed by the
    /// sixth-order sigmoid fit of the AgX base contrast. Output is already
    /// display encoded.
    Agx,
}

pub const DISPLAY_GAMMA: f64 = 2.4;

impl ToneCurve {
    pub const ALL: [ToneCurve; 4] = [
        ToneCurve::Gamma24,
        ToneCurve::Aces,
        ToneCurve::Filmic,
        ToneCurve::Agx,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ToneCurve::Gamma24 => "gamma24",
            ToneCurve::Aces => "aces",
            ToneCurve::Filmic => "filmic",
            ToneCurve::Agx => "agx",
        }
    }

    /// Maps one linear channel value to display `[0, 1]`.
    pub fn apply(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        let display = match self {
            ToneCurve::Gamma24 => encode(x),
            ToneCurve::Aces => encode(aces_fit(x)),
            ToneCurve::Filmic => encode(hable(2.0 * x) / hable(11.2)),
            ToneCurve::Agx => agx(x),
        };
        display.clamp(0.0, 1.0)
    }
}

impl fmt::Display for ToneCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ToneCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ToneCurve::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown tone curve '{s}'")))
    }
}

#[inline]
fn encode(x: f64) -> f64 {
    x.clamp(0.0, 1.0).powf(1.0 / DISPLAY_GAMMA)
}

fn aces_fit(x: f64) -> f64 {
    const A: f64 = 2.51;
    const B: f64 = 0.03;
    const C: f64 = 2.43;
    const D: f64 = 0.59;
    const E: f64 = 0.14;
    (x * (A * x + B)) / (x * (C * x + D) + E)
}

fn hable(x: f64) -> f64 {
    const A: f64 = 0.15;
    const B: f64 = 0.50;
    const C: f64 = 0.10;
    const D: f64 = 0.20;
    const E: f64 = 0.02;
    const F: f64 = 0.30;
    // the rational part equals E/F at x = 0; clamp the rounding residue
    (((x * (A * x + C * B) + D * E) / (x * (A * x + B) + D * F)) - E / F).max(0.0)
}

fn agx(x: f64) -> f64 {
    const MIN_EV: f64 = -12.47393;
    const MAX_EV: f64 = 4.026069;
    let t = ((x.log2() - MIN_EV) / (MAX_EV - MIN_EV)).clamp(0.0, 1.0);
    let t2 = t * t;
    let t4 = t2 * t2;
    15.5 * t4 * t2 - 40.14 * t4 * t + 31.96 * t4 - 6.868 * t2 * t + 0.4298 * t2 + 0.1191 * t
        - 0.00232
}

pub fn apply_display_tonemap(img: &Image, curve: ToneCurve) -> Image {
    img.map_channels(|v| curve.apply(v as f64) as f32)
}

/// Nearest-rank percentile of an unsorted sample: the value at rank
/// `ceil(p·N)` (1-based) of the ascending order.
pub fn percentile_nearest_rank(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = (p * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

pub fn luminance_percentile(img: &Image, percentile: f64) -> f64 {
    let lum: Vec<f64> = img.pixels().iter().map(|p| luminance(*p)).collect();
    percentile_nearest_rank(&lum, percentile)
}

/// Scales `img` so that its luminance at `percentile` equals `target`.
pub fn auto_expose(img: &Image, percentile: f64, target: f64) -> Result<(f64, Image)> {
    if !(0.0..=1.0).contains(&percentile) {
        return Err(Error::Precondition(format!(
            "percentile must be in [0, 1], got {percentile}"
        )));
    }
    let reference = luminance_percentile(img, percentile);
    if !(reference > 0.0) {
        return Err(Error::DegenerateExposure);
    }
    let scale = target / reference;
    Ok((scale, img.scaled(scale)))
}

/// Snaps a `[0, 1]` value to the 8-bit grid, rounding halves away from zero.
#[inline]
pub fn quantize8_value(v: f32) -> f32 {
    (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
}

pub fn quantize8(img: &Image) -> Image {
    img.map_channels(quantize8_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_tonemap_fixed_points() {
        assert_eq!(tonemap_ldr(0.0), 0.0);
        assert_eq!(tonemap_log(0.0), 0.0);
        assert!((tonemap_ldr(M_LDR) - 1.0).abs() < 1e-12);
        assert!((tonemap_log(M_LOG) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_tonemap_at_unit_radiance() {
        assert!((tonemap_ldr(1.0) - 0.501953125).abs() < 1e-15);
        // ln 2 / ln 10001
        assert!((tonemap_log(1.0) - 0.075_256_681_867_805).abs() < 1e-13);
    }

    #[test]
    fn tonemap_clips_above_range() {
        assert_eq!(tonemap_ldr(1e6), 1.0);
        assert_eq!(tonemap_log(1e6), 1.0);
    }

    #[test]
    fn inverse_rule_zero_and_round_trips() {
        assert_eq!(inverse_rule(0.0, 0.0), 0.0);
        for e in [4.0f64, 100.0] {
            let (l, g) = (tonemap_ldr(e) as f32, tonemap_log(e) as f32);
            let back = inverse_rule(l as f64, g as f64);
            assert!((back / e - 1.0).abs() < 1e-6, "{e} -> {back}");
        }
    }

    #[test]
    fn inconsistent_pair_does_not_error() {
        // saturated Reinhard channel with an empty log channel
        assert!((inverse_rule(1.0, 0.0) - M_LDR).abs() < 1e-12);
    }

    #[test]
    fn gamma_curve_values() {
        assert_eq!(ToneCurve::Gamma24.apply(1.0), 1.0);
        assert!((ToneCurve::Gamma24.apply(0.5) - 0.5f64.powf(1.0 / 2.4)).abs() < 1e-15);
        assert!((ToneCurve::Gamma24.apply(0.5) - 0.7491).abs() < 1e-4);
        for c in ToneCurve::ALL {
            assert_eq!(c.apply(0.0), 0.0, "{c}");
        }
    }

    #[test]
    fn curve_names_round_trip() {
        for c in ToneCurve::ALL {
            assert_eq!(c.name().parse::<ToneCurve>().unwrap(), c);
        }
        assert!("reinhard".parse::<ToneCurve>().is_err());
    }

    #[test]
    fn nearest_rank_percentile() {
        let v: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        assert_eq!(percentile_nearest_rank(&v, 0.5), 50.0);
        assert_eq!(percentile_nearest_rank(&v, 0.0), 1.0);
        assert_eq!(percentile_nearest_rank(&v, 1.0), 100.0);
        assert_eq!(percentile_nearest_rank(&v, 0.99), 99.0);
    }

    #[test]
    fn auto_expose_examples() {
        let constant = Image::filled(4, 4, [2.0; 3]);
        let (scale, _) = auto_expose(&constant, 0.99, 0.9).unwrap();
        assert!((scale - 0.45).abs() < 1e-12);

        let exposed = Image::filled(4, 4, [0.9; 3]);
        let (scale, _) = auto_expose(&exposed, 0.99, 0.9).unwrap();
        assert!((scale - 1.0).abs() < 1e-6);

        let ramp = Image::from_fn(10, 10, |c, r| [(r * 10 + c + 1) as f32; 3]);
        let (scale, scaled) = auto_expose(&ramp, 0.5, 0.5).unwrap();
        assert!((scale - 0.01).abs() < 1e-12);
        assert!((luminance_percentile(&scaled, 0.5) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn black_image_cannot_be_exposed() {
        let black = Image::filled(3, 3, [0.0; 3]);
        assert!(matches!(
            auto_expose(&black, 0.99, 0.9),
            Err(Error::DegenerateExposure)
        ));
    }

    #[test]
    fn quantization_grid() {
        assert_eq!(quantize8_value(0.0), 0.0);
        assert_eq!(quantize8_value(1.0), 1.0);
        assert_eq!(quantize8_value(0.5), 128.0 / 255.0);
        for i in 0..=1000 {
            let q = quantize8_value(i as f32 / 1000.0);
            assert_eq!(quantize8_value(q).to_bits(), q.to_bits());
        }
    }
}
