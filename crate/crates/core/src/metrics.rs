//! Lighting-estimation metrics and the three-sphere evaluation driver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::envmap::{peak_direction, EnvironmentMap, DEFAULT_PEAK_PERCENTILE};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::probe::{render_probe, Material, MaterialKind};

/// RGB vectors with a norm at or below this are skipped by [`angular_error`].
pub const ANGULAR_EPS: f64 = 1e-8;

fn masked<'a>(pred: &'a Image, gt: &'a Image, mask: &'a [bool]) -> Result<Vec<([f32; 3], [f32; 3])>> {
    if !pred.same_shape(gt) {
        return Err(Error::DimensionMismatch(format!(
            "prediction is {}x{}, reference is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    if mask.len() != pred.pixels().len() {
        return Err(Error::DimensionMismatch(format!(
            "mask has {} entries for {} pixels",
            mask.len(),
            pred.pixels().len()
        )));
    }
    let pairs: Vec<_> = pred
        .pixels()
        .iter()
        .zip(gt.pixels())
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|((p, g), _)| (*p, *g))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Precondition("mask selects no pixels".into()));
    }
    Ok(pairs)
}

/// A mask selecting every pixel of `img`.
pub fn full_mask(img: &Image) -> Vec<bool> {
    vec![true; img.pixels().len()]
}

/// RMSE after the least-squares scale `α = Σpg / Σp²` is applied to `pred`.
pub fn si_rmse(pred: &Image, gt: &Image, mask: &[bool]) -> Result<f64> {
    let pairs = masked(pred, gt, mask)?;
    let (mut pg, mut pp) = (0.0f64, 0.0f64);
    for (p, g) in &pairs {
        for ch in 0..3 {
            pg += p[ch] as f64 * g[ch] as f64;
            pp += p[ch] as f64 * p[ch] as f64;
        }
    }
    if pp == 0.0 {
        return Err(Error::DegeneratePrediction);
    }
    let alpha = pg / pp;
    let mut sq = 0.0;
    for (p, g) in &pairs {
        for ch in 0..3 {
            let r = alpha * p[ch] as f64 - g[ch] as f64;
            sq += r * r;
        }
    }
    Ok((sq / (pairs.len() * 3) as f64).sqrt())
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Angle in degrees between two RGB triples, or `None` if either is ~zero.
pub fn rgb_angle_deg(p: [f64; 3], q: [f64; 3]) -> Option<f64> {
    if norm(p) <= ANGULAR_EPS || norm(q) <= ANGULAR_EPS {
        return None;
    }
    let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    let cross = [
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    ];
    Some(norm(cross).atan2(dot).to_degrees())
}

/// Mean per-pixel RGB angle in degrees over masked pixels with non-zero color.
pub fn angular_error(pred: &Image, gt: &Image, mask: &[bool]) -> Result<f64> {
    let pairs = masked(pred, gt, mask)?;
    let to64 = |v: [f32; 3]| [v[0] as f64, v[1] as f64, v[2] as f64];
    let angles: Vec<f64> = pairs
        .iter()
        .filter_map(|(p, g)| rgb_angle_deg(to64(*p), to64(*g)))
        .collect();
    if angles.is_empty() {
        return Err(Error::NoQualifyingPixels);
    }
    Ok(angles.iter().sum::<f64>() / angles.len() as f64)
}

/// RMSE after scaling each image to unit mean over the mask.
pub fn n_rmse(pred: &Image, gt: &Image, mask: &[bool]) -> Result<f64> {
    let pairs = masked(pred, gt, mask)?;
    let n = (pairs.len() * 3) as f64;
    let mean = |pick: fn(&([f32; 3], [f32; 3])) -> [f32; 3]| -> f64 {
        pairs
            .iter()
            .map(|x| pick(x).iter().map(|&v| v as f64).sum::<f64>())
            .sum::<f64>()
            / n
    };
    let (mp, mg) = (mean(|x| x.0), mean(|x| x.1));
    if !(mp > 0.0 && mg > 0.0) {
        return Err(Error::ZeroMean);
    }
    let mut sq = 0.0;
    for (p, g) in &pairs {
        for ch in 0..3 {
            let r = p[ch] as f64 / mp - g[ch] as f64 / mg;
            sq += r * r;
        }
    }
    Ok((sq / n).sqrt())
}

/// Great-circle angle in degrees between the dominant light directions.
pub fn peak_angular_error(pred: &EnvironmentMap, gt: &EnvironmentMap) -> Result<f64> {
    let a = peak_direction(pred, DEFAULT_PEAK_PERCENTILE)?;
    let b = peak_direction(gt, DEFAULT_PEAK_PERCENTILE)?;
    Ok(a.angle_deg(&b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
}

/// Mean and population standard deviation.
pub fn temporal_stats(values: &[f64]) -> Result<Stats> {
    if values.is_empty() {
        return Err(Error::Empty("per-frame values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(Stats {
        mean,
        std: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MaterialScores {
    pub si_rmse: f64,
    pub angular_deg: f64,
    pub n_rmse: f64,
}

impl MaterialScores {
    const NAMES: [&'static str; 3] = ["si_rmse", "angular_deg", "n_rmse"];

    fn values(&self) -> [f64; 3] {
        [self.si_rmse, self.angular_deg, self.n_rmse]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MaterialTable {
    pub diffuse: MaterialScores,
    pub matte: MaterialScores,
    pub mirror: MaterialScores,
}

impl MaterialTable {
    pub fn get(&self, kind: MaterialKind) -> &MaterialScores {
        match kind {
            MaterialKind::Diffuse => &self.diffuse,
            MaterialKind::Matte => &self.matte,
            MaterialKind::Mirror => &self.mirror,
        }
    }

    fn get_mut(&mut self, kind: MaterialKind) -> &mut MaterialScores {
        match kind {
            MaterialKind::Diffuse => &mut self.diffuse,
            MaterialKind::Matte => &mut self.matte,
            MaterialKind::Mirror => &mut self.mirror,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub materials: MaterialTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pae_deg: Option<f64>,
    /// Keyed `<material>.<metric>` and `pae_deg`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub temporal: BTreeMap<String, Stats>,
}

impl MetricReport {
    /// Every scalar in the report, labelled, in a fixed order.
    pub fn entries(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for kind in MaterialKind::ALL {
            let scores = self.materials.get(kind);
            for (name, v) in MaterialScores::NAMES.iter().zip(scores.values()) {
                out.push((format!("{}.{name}", kind.name()), v));
            }
        }
        if let Some(p) = self.pae_deg {
            out.push(("pae_deg".into(), p));
        }
        for (k, s) in &self.temporal {
            out.push((format!("temporal.{k}.mean"), s.mean));
            out.push((format!("temporal.{k}.std"), s.std));
        }
        out
    }
}

/// Renders the three probes from both maps and scores each material inside
/// the sphere mask; PAE is measured on the maps themselves.
pub fn evaluate_three_spheres(
    pred: &EnvironmentMap,
    gt: &EnvironmentMap,
    probe_size: usize,
) -> Result<MetricReport> {
    let mut report = MetricReport::default();
    for kind in MaterialKind::ALL {
        let material = Material::default_for(kind);
        let p = render_probe(pred, &material, probe_size)?;
        let g = render_probe(gt, &material, probe_size)?;
        *report.materials.get_mut(kind) = MaterialScores {
            si_rmse: si_rmse(&p.image, &g.image, &g.mask)?,
            angular_deg: angular_error(&p.image, &g.image, &g.mask)?,
            n_rmse: n_rmse(&p.image, &g.image, &g.mask)?,
        };
    }
    report.pae_deg = Some(peak_angular_error(pred, gt)?);
    Ok(report)
}

/// Per-frame evaluation of two equally long sequences. Material scores and
/// PAE are frame means; `temporal` holds mean and std of every metric.
pub fn evaluate_sequence(
    preds: &[EnvironmentMap],
    gts: &[EnvironmentMap],
    probe_size: usize,
) -> Result<MetricReport> {
    if preds.is_empty() {
        return Err(Error::Empty("prediction sequence"));
    }
    if preds.len() != gts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predicted frames vs {} reference frames",
            preds.len(),
            gts.len()
        )));
    }
    use rayon::prelude::*;
    let frames = preds
        .par_iter()
        .zip(gts)
        .map(|(p, g)| evaluate_three_spheres(p, g, probe_size))
        .collect::<Result<Vec<_>>>()?;

    let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for f in &frames {
        for (k, v) in f.entries() {
            series.entry(k).or_default().push(v);
        }
    }
    let mut report = MetricReport::default();
    for (key, values) in &series {
        let stats = temporal_stats(values)?;
        if key == "pae_deg" {
            report.pae_deg = Some(stats.mean);
        } else {
            let (mat, metric) = key.split_once('.').expect("material.metric key");
            let kind = MaterialKind::ALL
                .into_iter()
                .find(|k| k.name() == mat)
                .expect("known material");
            let scores = report.materials.get_mut(kind);
            match metric {
                "si_rmse" => scores.si_rmse = stats.mean,
                "angular_deg" => scores.angular_deg = stats.mean,
                _ => scores.n_rmse = stats.mean,
            }
        }
        report.temporal.insert(key.clone(), stats);
    }
    Ok(report)
}
