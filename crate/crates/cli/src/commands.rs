use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use luxprobe::envmap::{peak_direction, rotate_env, DEFAULT_PEAK_PERCENTILE};
use luxprobe::fusion::{
    fuse_image, heldout_rng, net_rmse, rule_rmse, sample_training_pairs, sidecar_path, train_fusion,
    FusionNet, SamplerConfig, TrainConfig,
};
use luxprobe::io;
use luxprobe::metrics::{evaluate_sequence, evaluate_three_spheres};
use luxprobe::probe::{render_probe, Material, MaterialKind};
use luxprobe::projection::{
    generate_sample, project_perspective, CameraRanges, CameraSpec, DatasetOptions, DynamicRange,
    LightingTarget, PanoSource, DEFAULT_CONE_DEG,
};
use luxprobe::tonemap::{
    apply_display_tonemap, inverse_rule_image, percentile_nearest_rank, quantize8, tonemap_dual,
    DualToneMaps, ToneCurve,
};
use luxprobe::{envmap, EnvironmentMap, Image};

use crate::manifest::{beside, Run};
use crate::Common;

/// PNG tag of the Reinhard channel of a dual tone-mapped pair.
const DUAL_LDR_TAG: &str = "dual-ldr";
/// PNG tag of the log channel of a dual tone-mapped pair.
const DUAL_LOG_TAG: &str = "dual-log";
/// PNG tag of crops taken from display-referred panoramas.
const LDR_SOURCE_TAG: &str = "ldr-source";

fn load_env(run: &mut Run, path: &Path) -> Result<(EnvironmentMap, DynamicRange)> {
    let bytes = run.read(path)?;
    let img = io::decode_image(path, &bytes).with_context(|| format!("decoding {}", path.display()))?;
    let range = match io::extension(path).as_deref() {
        Some("png") => DynamicRange::Ldr,
        _ => DynamicRange::Hdr,
    };
    let env = EnvironmentMap::new(img).with_context(|| format!("loading {}", path.display()))?;
    Ok((env, range))
}

fn load_hdr(run: &mut Run, path: &Path) -> Result<EnvironmentMap> {
    let (env, range) = load_env(run, path)?;
    if range != DynamicRange::Hdr {
        bail!("{} is not an HDR map (expected .pfm or .hdr)", path.display());
    }
    Ok(env)
}

fn load_png(run: &mut Run, path: &Path, expected_tag: &str) -> Result<Image> {
    let bytes = run.read(path)?;
    let ldr = io::decode_png(&bytes).with_context(|| format!("decoding {}", path.display()))?;
    if let Some(tag) = &ldr.curve {
        if tag != expected_tag {
            bail!(
                "{} is tagged '{tag}', expected '{expected_tag}'",
                path.display()
            );
        }
    }
    Ok(ldr.image)
}

fn encode_output(path: &Path, img: &Image, curve: Option<&str>) -> Result<Vec<u8>> {
    match io::extension(path).as_deref() {
        Some("pfm") => Ok(io::encode_pfm(img)),
        Some("png") => Ok(io::encode_png(img, curve)?),
        _ => bail!("{}: output must end in .pfm or .png", path.display()),
    }
}

fn manifest_path(common: &Common, primary: &Path) -> PathBuf {
    common.manifest.clone().unwrap_or_else(|| beside(primary))
}

fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

#[derive(Args, Serialize, Debug)]
pub struct CropArgs {
    /// Panorama (.pfm/.hdr for HDR, .png for LDR).
    #[arg(long)]
    pub pano: PathBuf,
    /// Azimuth in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub az: f64,
    /// Elevation in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub el: f64,
    /// Horizontal field of view in degrees.
    #[arg(long, default_value_t = 60.0)]
    pub fov: f64,
    #[arg(long, default_value_t = 720)]
    pub w: usize,
    #[arg(long, default_value_t = 480)]
    pub h: usize,
    /// Display curve for PNG crops of HDR panoramas.
    #[arg(long, default_value = "gamma24")]
    pub curve: String,
    /// Output crop (.pfm keeps linear values, .png is display referred).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn crop(a: CropArgs) -> Result<()> {
    let mut run = Run::new("crop", a.common.seed, &a)?;
    let curve: ToneCurve = a.curve.parse()?;
    let (pano, range) = load_env(&mut run, &a.pano)?;
    let manifest = manifest_path(&a.common, &a.out);
    run.check_outputs(&[&a.out, &manifest])?;
    let cam = CameraSpec::new(a.az, a.el, a.fov, a.w, a.h)?;
    let view = project_perspective(&pano, &cam);
    let png = io::extension(&a.out).as_deref() == Some("png");
    let (img, tag) = match (png, range) {
        (true, DynamicRange::Hdr) => (quantize8(&apply_display_tonemap(&view, curve)), curve.name()),
        (true, DynamicRange::Ldr) => (quantize8(&view), LDR_SOURCE_TAG),
        (false, _) => (view, "linear"),
    };
    run.write(&a.out, &encode_output(&a.out, &img, Some(tag))?)?;
    run.results = json!({ "camera": cam, "fov_axis": "horizontal", "tone_curve": tag });
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct DatasetGenArgs {
    /// Directory of panoramas; each subdirectory is one panorama video.
    #[arg(long)]
    pub panos_dir: PathBuf,
    #[arg(long)]
    pub count: usize,
    /// Frames per sample; omit for single images.
    #[arg(long)]
    pub video_frames: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Trajectory cone half-angle in degrees.
    #[arg(long, default_value_t = DEFAULT_CONE_DEG)]
    pub cone: f64,
    #[arg(long, default_value_t = 720)]
    pub w: usize,
    #[arg(long, default_value_t = 480)]
    pub h: usize,
    #[arg(long, default_value_t = 45.0)]
    pub fov_min: f64,
    #[arg(long, default_value_t = 80.0)]
    pub fov_max: f64,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub el_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub el_max: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn sorted_images(dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(sorted_entries(dir)?
        .into_iter()
        .filter(|p| p.is_file() && io::is_image_path(p))
        .collect())
}

fn discover_sources(run: &mut Run, dir: &Path) -> Result<Vec<PanoSource>> {
    let mut sources = Vec::new();
    for path in sorted_entries(dir)? {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if path.is_dir() {
            let frames = sorted_images(&path)?;
            if frames.is_empty() {
                continue;
            }
            let mut maps = Vec::with_capacity(frames.len());
            let mut range = None;
            for f in &frames {
                let (env, r) = load_env(run, f)?;
                if range.is_some_and(|prev| prev != r) {
                    bail!("{} mixes HDR and LDR frames", path.display());
                }
                range = Some(r);
                maps.push(env);
            }
            sources.push(PanoSource {
                name,
                range: range.expect("non-empty frame list"),
                frames: maps,
            });
        } else if path.is_file() && io::is_image_path(&path) {
            let (env, range) = load_env(run, &path)?;
            sources.push(PanoSource::still(name, range, env));
        }
    }
    if sources.is_empty() {
        return Err(luxprobe::Error::Empty("panorama list"))
            .with_context(|| format!("no panoramas in {}", dir.display()));
    }
    Ok(sources)
}

/// Samples generated concurrently before being written.
const DATASET_CHUNK: usize = 8;

pub fn dataset_gen(a: DatasetGenArgs) -> Result<()> {
    let mut run = Run::new("dataset-gen", a.common.seed, &a)?;
    if !a.panos_dir.is_dir() {
        bail!("{} is not a directory", a.panos_dir.display());
    }
    let sources = discover_sources(&mut run, &a.panos_dir)?;
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    let manifest = a
        .common
        .manifest
        .clone()
        .unwrap_or_else(|| a.out_dir.join("manifest.json"));
    let jsonl = a.out_dir.join("samples.jsonl");
    run.check_outputs(&[&manifest, &jsonl])?;

    let opts = DatasetOptions {
        cameras: CameraRanges {
            fov: (a.fov_min, a.fov_max),
            elevation: (a.el_min, a.el_max),
            width: a.w,
            height: a.h,
            ..CameraRanges::default()
        },
        video_frames: a.video_frames,
        cone_deg: a.cone,
        ..DatasetOptions::default()
    };
    let mut lines = Vec::new();
    for start in (0..a.count).step_by(DATASET_CHUNK) {
        let end = (start + DATASET_CHUNK).min(a.count);
        let samples = (start..end)
            .into_par_iter()
            .map(|i| generate_sample(&sources, a.common.seed, i, &opts))
            .collect::<luxprobe::Result<Vec<_>>>()?;
        for s in samples {
            let tag = s.tone_curve.map(|c| c.name()).unwrap_or(LDR_SOURCE_TAG);
            let mut crops = Vec::new();
            let mut ldr = Vec::new();
            let mut log = Vec::new();
            for (k, (crop, target)) in s.crops.iter().zip(&s.targets).enumerate() {
                let stem = format!("sample_{:06}_f{:02}", s.index, k);
                let name = format!("{stem}_crop.png");
                run.write(&a.out_dir.join(&name), &io::encode_png(crop, Some(tag))?)?;
                crops.push(name);
                let name = format!("{stem}_ldr.png");
                run.write(&a.out_dir.join(&name), &io::encode_png(target.ldr(), Some(DUAL_LDR_TAG))?)?;
                ldr.push(name);
                if let Some(img) = target.log() {
                    let name = format!("{stem}_log.png");
                    run.write(&a.out_dir.join(&name), &io::encode_png(img, Some(DUAL_LOG_TAG))?)?;
                    log.push(name);
                }
            }
            let log_absent = s.targets.iter().any(|t| matches!(t, LightingTarget::LdrOnly(_)));
            let record = json!({
                "index": s.index,
                "source": sources[s.source].name,
                "range": s.range,
                "fov_axis": "horizontal",
                "cameras": s.cameras,
                "tone_curve": s.tone_curve,
                "exposure_scale": s.exposure_scale,
                "crops": crops,
                "ldr": ldr,
                "log": if log_absent { serde_json::Value::Null } else { json!(log) },
                "log_absent": log_absent,
            });
            lines.extend(serde_json::to_vec(&record)?);
            lines.push(b'\n');
        }
    }
    run.write(&jsonl, &lines)?;
    run.results = json!({ "samples": a.count, "sources": sources.len(), "fov_axis": "horizontal" });
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct TonemapArgs {
    /// HDR map (.pfm or .hdr).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_ldr: PathBuf,
    #[arg(long)]
    pub out_log: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn tonemap(a: TonemapArgs) -> Result<()> {
    let mut run = Run::new("tonemap", a.common.seed, &a)?;
    let env = load_hdr(&mut run, &a.input)?;
    let manifest = manifest_path(&a.common, &a.out_ldr);
    run.check_outputs(&[&a.out_ldr, &a.out_log, &manifest])?;
    let maps = tonemap_dual(&env);
    run.write(&a.out_ldr, &io::encode_png(maps.ldr(), Some(DUAL_LDR_TAG))?)?;
    run.write(&a.out_log, &io::encode_png(maps.log(), Some(DUAL_LOG_TAG))?)?;
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct InverseArgs {
    #[arg(long)]
    pub ldr: PathBuf,
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn load_pair(run: &mut Run, ldr: &Path, log: &Path) -> Result<DualToneMaps> {
    let ldr = load_png(run, ldr, DUAL_LDR_TAG)?;
    let log = load_png(run, log, DUAL_LOG_TAG)?;
    Ok(DualToneMaps::new(ldr, log)?)
}

pub fn inverse(a: InverseArgs) -> Result<()> {
    let mut run = Run::new("inverse", a.common.seed, &a)?;
    let maps = load_pair(&mut run, &a.ldr, &a.log)?;
    let manifest = manifest_path(&a.common, &a.out);
    run.check_outputs(&[&a.out, &manifest])?;
    let env = inverse_rule_image(&maps)?;
    run.write(&a.out, &encode_output(&a.out, env.image(), None)?)?;
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct FuseTrainArgs {
    #[arg(long, default_value_t = TrainConfig::default().steps)]
    pub steps: usize,
    #[arg(long, default_value_t = TrainConfig::default().batch_size)]
    pub batch: usize,
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub lr: f64,
    /// Huber loss threshold.
    #[arg(long, default_value_t = TrainConfig::default().delta)]
    pub delta: f64,
    /// Half-width of the per-channel log offset around a shared scale.
    #[arg(long, default_value_t = SamplerConfig::default().chroma_jitter.unwrap_or(0.0))]
    pub chroma_jitter: f64,
    /// Draw each channel independently instead of around a shared scale.
    #[arg(long)]
    pub independent_channels: bool,
    /// Train on unquantized tone-mapped values.
    #[arg(long)]
    pub no_quantize: bool,
    /// Held-out pairs used to report test RMSE.
    #[arg(long, default_value_t = 20_000)]
    pub heldout: usize,
    /// Parameter file; the layer widths go to `<out>.widths`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn fuse_train(a: FuseTrainArgs) -> Result<()> {
    let mut run = Run::new("fuse-train", a.common.seed, &a)?;
    let sidecar = sidecar_path(&a.out);
    let manifest = manifest_path(&a.common, &a.out);
    run.check_outputs(&[&a.out, &sidecar, &manifest])?;
    let mut cfg = TrainConfig {
        steps: a.steps,
        batch_size: a.batch,
        learning_rate: a.lr,
        delta: a.delta,
        seed: a.common.seed,
        ..TrainConfig::default()
    };
    cfg.sampler.quantize = !a.no_quantize;
    cfg.sampler.chroma_jitter = (!a.independent_channels).then_some(a.chroma_jitter);
    let outcome = train_fusion(&cfg)?;
    run.write(&a.out, &outcome.net.to_bytes())?;
    run.write(&sidecar, outcome.net.widths_manifest().as_bytes())?;
    let mut results = json!({ "final_loss": outcome.final_loss, "config": cfg });
    if a.heldout > 0 {
        let test = sample_training_pairs(&mut heldout_rng(a.common.seed), a.heldout, &cfg.sampler)?;
        let mlp = net_rmse(&outcome.net, &test)?;
        let rule = rule_rmse(&test);
        results["heldout"] = json!({ "pairs": a.heldout, "mlp_rmse": mlp, "rule_rmse": rule });
    }
    run.results = results;
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct FuseApplyArgs {
    /// Parameter file written by fuse-train.
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub ldr: PathBuf,
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn fuse_apply(a: FuseApplyArgs) -> Result<()> {
    let mut run = Run::new("fuse-apply", a.common.seed, &a)?;
    let bytes = run.read(&a.net)?;
    let widths_text = run.read(&sidecar_path(&a.net))?;
    let widths = FusionNet::parse_widths_manifest(&String::from_utf8_lossy(&widths_text))?;
    let net = FusionNet::from_bytes(&bytes, &widths)?;
    let maps = load_pair(&mut run, &a.ldr, &a.log)?;
    let manifest = manifest_path(&a.common, &a.out);
    run.check_outputs(&[&a.out, &manifest])?;
    let env = fuse_image(&net, &maps)?;
    run.write(&a.out, &encode_output(&a.out, env.image(), None)?)?;
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct RenderProbesArgs {
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    /// Outputs are `<prefix>{mirror,matte,diffuse}.{pfm,png}`.
    #[arg(long)]
    pub out_prefix: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// Display preview: the masked median luminance is scaled to 0.5, then the
/// gamma-2.4 curve is applied.
fn probe_preview(img: &Image, mask: &[bool]) -> Image {
    let lum: Vec<f64> = img
        .pixels()
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(p, _)| envmap::luminance(*p))
        .collect();
    let median = if lum.is_empty() { 0.0 } else { percentile_nearest_rank(&lum, 0.5) };
    let scale = if median > 0.0 { 0.5 / median } else { 1.0 };
    quantize8(&apply_display_tonemap(&img.scaled(scale), ToneCurve::Gamma24))
}

pub fn render_probes(a: RenderProbesArgs) -> Result<()> {
    let mut run = Run::new("render-probes", a.common.seed, &a)?;
    let env = load_hdr(&mut run, &a.env)?;
    let path = |name: &str, ext: &str| PathBuf::from(format!("{}{name}.{ext}", a.out_prefix));
    let manifest = a
        .common
        .manifest
        .clone()
        .unwrap_or_else(|| path("manifest", "json"));
    let mut planned = vec![manifest.clone()];
    for kind in MaterialKind::ALL {
        planned.push(path(kind.name(), "pfm"));
        planned.push(path(kind.name(), "png"));
    }
    run.check_outputs(&planned.iter().map(|p| p.as_path()).collect::<Vec<_>>())?;
    for kind in [MaterialKind::Mirror, MaterialKind::Matte, MaterialKind::Diffuse] {
        let probe = render_probe(&env, &Material::default_for(kind), a.size)?;
        run.write(&path(kind.name(), "pfm"), &io::encode_pfm(&probe.image))?;
        let preview = probe_preview(&probe.image, &probe.mask);
        run.write(
            &path(kind.name(), "png"),
            &io::encode_png(&preview, Some(ToneCurve::Gamma24.name()))?,
        )?;
    }
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub probe_size: usize,
    /// JSON report.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let mut run = Run::new("eval", a.common.seed, &a)?;
    let pred = load_hdr(&mut run, &a.pred)?;
    let gt = load_hdr(&mut run, &a.gt)?;
    let manifest = manifest_path(&a.common, &a.out);
    run.check_outputs(&[&a.out, &manifest])?;
    let report = evaluate_three_spheres(&pred, &gt, a.probe_size)?;
    run.write(&a.out, &json_bytes(&report)?)?;
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct EvalVideoArgs {
    /// Predicted frames, paired with the reference frames by sorted name.
    #[arg(long)]
    pub pred_dir: PathBuf,
    #[arg(long)]
    pub gt_dir: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub probe_size: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn eval_video(a: EvalVideoArgs) -> Result<()> {
    let mut run = Run::new("eval-video", a.common.seed, &a)?;
    let mut load_dir = |dir: &Path| -> Result<Vec<EnvironmentMap>> {
        let files = sorted_images(dir)?;
        files.iter().map(|f| load_hdr(&mut run, f)).collect()
    };
    let preds = load_dir(&a.pred_dir)?;
    let gts = load_dir(&a.gt_dir)?;
    let manifest = manifest_path(&a.common, &a.out);
    run.check_outputs(&[&a.out, &manifest])?;
    let report = evaluate_sequence(&preds, &gts, a.probe_size)?;
    run.write(&a.out, &json_bytes(&report)?)?;
    run.results = json!({ "frames": preds.len() });
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct PeakArgs {
    #[arg(long)]
    pub env: PathBuf,
    /// Luminance percentile (by solid angle) marking the peak region.
    #[arg(long, default_value_t = DEFAULT_PEAK_PERCENTILE)]
    pub percentile: f64,
    /// JSON result.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn peak(a: PeakArgs) -> Result<()> {
    let mut run = Run::new("peak", a.common.seed, &a)?;
    let env = load_hdr(&mut run, &a.env)?;
    let manifest = manifest_path(&a.common, &a.out);
    run.check_outputs(&[&a.out, &manifest])?;
    let d = peak_direction(&env, a.percentile)?;
    let result = json!({
        "direction": d,
        "azimuth_deg": d.azimuth().to_degrees(),
        "elevation_deg": d.y.clamp(-1.0, 1.0).asin().to_degrees(),
    });
    run.write(&a.out, &json_bytes(&result)?)?;
    run.finish(&manifest)
}

#[derive(Args, Serialize, Debug)]
pub struct RotateArgs {
    #[arg(long)]
    pub env: PathBuf,
    /// Degrees; content at azimuth φ moves to φ − yaw.
    #[arg(long, allow_negative_numbers = true)]
    pub yaw: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn rotate(a: RotateArgs) -> Result<()> {
    let mut run = Run::new("rotate", a.common.seed, &a)?;
    let env = load_hdr(&mut run, &a.env)?;
    let manifest = manifest_path(&a.common, &a.out);
    run.check_outputs(&[&a.out, &manifest])?;
    if !a.yaw.is_finite() {
        bail!("yaw must be finite");
    }
    let out = rotate_env(&env, a.yaw);
    run.write(&a.out, &encode_output(&a.out, out.image(), None)?)?;
    run.finish(&manifest)
}
