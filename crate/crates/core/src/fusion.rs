//! The per-pixel fusion MLP mapping a dual tone-mapped pair back to HDR
//! radiance, its trainer and the synthetic training-data sampler.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::envmap::EnvironmentMap;
use crate::error::{Error, Result};
use crate::tonemap::{inverse_rule, tonemap_ldr, tonemap_log, DualToneMaps};

pub const LAYER_WIDTHS: [usize; 6] = [6, 64, 64, 64, 64, 3];
pub const LEAKY_SLOPE: f64 = 0.01;

const MAGIC: &[u8; 4] = b"LXFN";
const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;
/// Rows per gradient chunk; fixed so the reduction order never depends on
/// the thread count.
const CHUNK: usize = 256;

#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn leaky(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        LEAKY_SLOPE * z
    }
}

pub fn huber_loss(pred: f64, target: f64, delta: f64) -> f64 {
    let e = (pred - target).abs();
    if e <= delta {
        0.5 * e * e
    } else {
        delta * (e - 0.5 * delta)
    }
}

#[inline]
fn huber_grad(e: f64, delta: f64) -> f64 {
    e.clamp(-delta, delta)
}

/// `C (m×n) = A (m×k) · Bᵀ` where `B` is stored `n×k` row-major.
fn gemm_abt(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= n * k && c.len() >= m * n);
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), 1, k as isize,
            0.0,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// `C (m×n) += Aᵀ · B` where `A` is stored `k×m` and `B` is `k×n`.
fn gemm_atb_acc(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), 1, m as isize,
            b.as_ptr(), n as isize, 1,
            1.0,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// `C (m×n) = A (m×k) · B (k×n)`, both row-major.
fn gemm_ab(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), n as isize, 1,
            0.0,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// Fully connected net with LeakyReLU hidden layers and a softplus output.
///
/// Parameters live in one flat vector: for each layer the `out×in` weight
/// matrix (row-major) followed by its `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionNet {
    widths: Vec<usize>,
    params: Vec<f64>,
}

impl FusionNet {
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::Precondition(format!("invalid layer widths {widths:?}")));
        }
        if widths[0] != 6 || widths[widths.len() - 1] != 3 {
            return Err(Error::Precondition(format!(
                "fusion nets map 6 inputs to 3 outputs, got {widths:?}"
            )));
        }
        let count = widths.windows(2).map(|p| p[0] * p[1] + p[1]).sum();
        Ok(FusionNet {
            widths: widths.to_vec(),
            params: vec![0.0; count],
        })
    }

    /// Uniform fan-in initialization, `U(-1/√in, 1/√in)` for weights and biases.
    pub fn init(widths: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut off = 0;
        for pair in net.widths.clone().windows(2) {
            let bound = 1.0 / (pair[0] as f64).sqrt();
            let n = pair[0] * pair[1] + pair[1];
            for p in &mut net.params[off..off + n] {
                *p = rng.random_range(-bound..bound);
            }
            off += n;
        }
        Ok(net)
    }

    /// The 6-64-64-64-64-3 architecture.
    pub fn standard(seed: u64) -> Self {
        Self::init(&LAYER_WIDTHS, seed).expect("standard widths are valid")
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteParameters)
        }
    }

    /// (weight offset, bias offset, inputs, outputs) per layer.
    fn layout(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut off = 0;
        self.widths
            .windows(2)
            .map(|p| {
                let entry = (off, off + p[0] * p[1], p[0], p[1]);
                off += p[0] * p[1] + p[1];
                entry
            })
            .collect()
    }

    /// Batched forward pass over `n` rows of 6 inputs. Returns the
    /// pre-activations of every layer and the final outputs.
    fn forward_tape(&self, input: &[f64], n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let layout = self.layout();
        let last = layout.len() - 1;
        let mut pre = Vec::with_capacity(layout.len());
        let mut act = input.to_vec();
        for (l, &(w, b, fan_in, fan_out)) in layout.iter().enumerate() {
            let mut z = vec![0.0; n * fan_out];
            gemm_abt(n, fan_in, fan_out, &act, &self.params[w..b], &mut z);
            let bias = &self.params[b..b + fan_out];
            for row in z.chunks_exact_mut(fan_out) {
                for (v, bb) in row.iter_mut().zip(bias) {
                    *v += bb;
                }
            }
            act = if l == last {
                z.iter().map(|&v| softplus(v)).collect()
            } else {
                z.iter().map(|&v| leaky(v)).collect()
            };
            pre.push(z);
        }
        (pre, act)
    }

    fn forward_batch(&self, input: &[f64], n: usize) -> Vec<f64> {
        self.forward_tape(input, n).1
    }

    /// Sum of Huber losses over the chunk and the matching gradient sum.
    fn chunk_gradient(&self, pairs: &[TrainingPair], delta: f64) -> (f64, Vec<f64>) {
        let n = pairs.len();
        let input: Vec<f64> = pairs.iter().flat_map(|p| p.input()).collect();
        let (pre, out) = self.forward_tape(&input, n);
        let layout = self.layout();
        let mut grad = vec![0.0; self.params.len()];

        let mut loss = 0.0;
        let last = layout.len() - 1;
        let mut dz: Vec<f64> = vec![0.0; n * 3];
        for (i, p) in pairs.iter().enumerate() {
            for ch in 0..3 {
                let k = i * 3 + ch;
                let e = out[k] - p.hdr[ch];
                loss += huber_loss(out[k], p.hdr[ch], delta);
                dz[k] = huber_grad(e, delta) * sigmoid(pre[last][k]);
            }
        }

        for l in (0..layout.len()).rev() {
            let (w, b, fan_in, fan_out) = layout[l];
            let prev_act: Vec<f64> = if l == 0 {
                input.clone()
            } else {
                pre[l - 1].iter().map(|&v| leaky(v)).collect()
            };
            gemm_atb_acc(fan_out, n, fan_in, &dz, &prev_act, &mut grad[w..b]);
            for row in dz.chunks_exact(fan_out) {
                for (g, d) in grad[b..b + fan_out].iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l > 0 {
                let mut da = vec![0.0; n * fan_in];
                gemm_ab(n, fan_out, fan_in, &dz, &self.params[w..b], &mut da);
                for (d, &z) in da.iter_mut().zip(&pre[l - 1]) {
                    if z <= 0.0 {
                        *d *= LEAKY_SLOPE;
                    }
                }
                dz = da;
            }
        }
        (loss, grad)
    }

    /// Mean Huber loss over every output channel of `pairs` and its exact
    /// gradient, in the order of [`FusionNet::parameters`].
    pub fn loss_and_gradient(&self, pairs: &[TrainingPair], delta: f64) -> (f64, Vec<f64>) {
        let parts: Vec<(f64, Vec<f64>)> = pairs
            .par_chunks(CHUNK)
            .map(|c| self.chunk_gradient(c, delta))
            .collect();
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.params.len()];
        for (l, g) in parts {
            loss += l;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        let scale = 1.0 / (pairs.len() * 3) as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        (loss * scale, grad)
    }

    /// Flat little-endian f32 parameter file with a 16-byte header:
    /// magic `LXFN`, format version, layer count, parameter count (all u32).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.params.len() * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.layer_count() as u32).to_le_bytes());
        out.extend_from_slice(&(self.params.len() as u32).to_le_bytes());
        for p in &self.params {
            out.extend_from_slice(&(*p as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], widths: &[usize]) -> Result<Self> {
        let bad = |m: String| Error::format("network", m);
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(bad("missing LXFN header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
        if word(4) != FORMAT_VERSION as usize {
            return Err(bad(format!("unsupported version {}", word(4))));
        }
        let mut net = Self::zeros(widths)?;
        if word(8) != net.layer_count() || word(12) != net.params.len() {
            return Err(bad(format!(
                "header describes {} layers / {} parameters, widths {widths:?} need {} / {}",
                word(8),
                word(12),
                net.layer_count(),
                net.params.len()
            )));
        }
        let body = &bytes[HEADER_LEN..];
        if body.len() != net.params.len() * 4 {
            return Err(bad(format!("parameter block holds {} bytes", body.len())));
        }
        for (p, c) in net.params.iter_mut().zip(body.chunks_exact(4)) {
            *p = f32::from_le_bytes(c.try_into().unwrap()) as f64;
        }
        net.check_finite()?;
        Ok(net)
    }

    /// Sidecar text listing the layer widths, e.g. `widths 6 64 64 64 64 3`.
    pub fn widths_manifest(&self) -> String {
        let ws: Vec<String> = self.widths.iter().map(|w| w.to_string()).collect();
        format!("widths {}\n", ws.join(" "))
    }

    pub fn parse_widths_manifest(text: &str) -> Result<Vec<usize>> {
        let line = text
            .lines()
            .find(|l| l.trim_start().starts_with("widths"))
            .ok_or_else(|| Error::format("network", "sidecar has no widths line"))?;
        line.split_whitespace()
            .skip(1)
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::format("network", format!("bad width '{t}'")))
            })
            .collect()
    }

    /// Writes `path` and the sidecar `path` + `.widths`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes())?;
        std::fs::write(sidecar_path(path), self.widths_manifest())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let widths = Self::parse_widths_manifest(&std::fs::read_to_string(sidecar_path(path))?)?;
        Self::from_bytes(&std::fs::read(path)?, &widths)
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".widths");
    s.into()
}

/// Single-pixel inference.
pub fn fusion_forward(net: &FusionNet, ldr: [f64; 3], log: [f64; 3]) -> Result<[f64; 3]> {
    net.check_finite()?;
    let input = [ldr[0], ldr[1], ldr[2], log[0], log[1], log[2]];
    let out = net.forward_batch(&input, 1);
    Ok([out[0], out[1], out[2]])
}

/// Batched inference over `(ldr, log)` pairs.
pub fn fusion_forward_many(net: &FusionNet, inputs: &[[f64; 6]]) -> Result<Vec<[f64; 3]>> {
    net.check_finite()?;
    Ok(inputs
        .par_chunks(CHUNK)
        .flat_map_iter(|c| {
            let flat: Vec<f64> = c.iter().flatten().copied().collect();
            let out = net.forward_batch(&flat, c.len());
            out.chunks_exact(3)
                .map(|o| [o[0], o[1], o[2]])
                .collect::<Vec<_>>()
        })
        .collect())
}

pub fn fuse_image(net: &FusionNet, maps: &DualToneMaps) -> Result<EnvironmentMap> {
    let inputs: Vec<[f64; 6]> = maps
        .ldr()
        .pixels()
        .iter()
        .zip(maps.log().pixels())
        .map(|(a, b)| {
            [a[0] as f64, a[1] as f64, a[2] as f64, b[0] as f64, b[1] as f64, b[2] as f64]
        })
        .collect();
    let out = fusion_forward_many(net, &inputs)?;
    let pixels = out
        .iter()
        .map(|o| [o[0] as f32, o[1] as f32, o[2] as f32])
        .collect();
    EnvironmentMap::from_pixels(maps.width(), maps.height(), pixels)
}

/// One supervised example: tone-mapped inputs and the HDR radiance they encode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingPair {
    pub ldr: [f64; 3],
    pub log: [f64; 3],
    pub hdr: [f64; 3],
}

impl TrainingPair {
    pub fn input(&self) -> [f64; 6] {
        [self.ldr[0], self.ldr[1], self.ldr[2], self.log[0], self.log[1], self.log[2]]
    }

    pub fn rule_prediction(&self) -> [f64; 3] {
        std::array::from_fn(|ch| inverse_rule(self.ldr[ch], self.log[ch]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SamplerConfig {
    /// Radiance range, sampled log-uniformly.
    pub intensity_range: [f64; 2],
    /// Half-width of the per-channel natural-log offset around a shared
    /// scale. `None` draws each channel independently.
    pub chroma_jitter: Option<f64>,
    /// Exposure multiplier range, sampled log-uniformly.
    pub exposure_range: [f64; 2],
    pub quantize: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            intensity_range: [1e-3, 1e4],
            chroma_jitter: Some(0.7),
            exposure_range: [0.25, 4.0],
            quantize: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.intensity_range;
        let [elo, ehi] = self.exposure_range;
        let jitter_ok = self.chroma_jitter.is_none_or(|j| j >= 0.0 && j.is_finite());
        if !(lo > 0.0 && hi > lo && hi.is_finite() && elo > 0.0 && ehi >= elo && ehi.is_finite() && jitter_ok) {
            return Err(Error::Precondition(format!(
                "invalid sampler ranges {:?} / {:?} / jitter {:?}",
                self.intensity_range, self.exposure_range, self.chroma_jitter
            )));
        }
        Ok(())
    }
}

#[inline]
fn quantize8_f64(v: f64) -> f64 {
    (v * 255.0).round() / 255.0
}

/// Draws `count` pairs. A log-uniform scale over the intensity range is
/// offset per channel by a uniform log-space jitter (or each channel is drawn
/// on its own), then multiplied by a shared exposure. Pixels pushed outside
/// the range are redrawn so the target distribution keeps its bounds.
pub fn sample_training_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    cfg: &SamplerConfig,
) -> Result<Vec<TrainingPair>> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be positive".into()));
    }
    cfg.validate()?;
    let (llo, lhi) = (cfg.intensity_range[0].ln(), cfg.intensity_range[1].ln());
    let (elo, ehi) = (cfg.exposure_range[0].ln(), cfg.exposure_range[1].ln());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let base: [f64; 3] = match cfg.chroma_jitter {
            None => std::array::from_fn(|_| rng.random_range(llo..=lhi)),
            Some(j) => {
                let scale = rng.random_range(llo..=lhi);
                std::array::from_fn(|_| if j > 0.0 { scale + rng.random_range(-j..=j) } else { scale })
            }
        };
        let exposure = if ehi > elo { rng.random_range(elo..=ehi) } else { elo };
        let hdr = base.map(|b| (b + exposure).exp());
        if hdr
            .iter()
            .any(|&v| v < cfg.intensity_range[0] || v > cfg.intensity_range[1])
        {
            continue;
        }
        let mut ldr = hdr.map(tonemap_ldr);
        let mut log = hdr.map(tonemap_log);
        if cfg.quantize {
            ldr = ldr.map(quantize8_f64);
            log = log.map(quantize8_f64);
        }
        out.push(TrainingPair { ldr, log, hdr });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LrSchedule {
    Constant,
    /// Half-cosine decay from the base rate to zero over the run.
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub schedule: LrSchedule,
    pub batch_size: usize,
    pub steps: usize,
    pub delta: f64,
    pub seed: u64,
    pub sampler: SamplerConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 2e-2,
            schedule: LrSchedule::Cosine,
            batch_size: 1024,
            steps: 50_000,
            delta: 1.0,
            seed: 0,
            sampler: SamplerConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Precondition(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Precondition(format!(
                "Huber delta must be positive, got {}",
                self.delta
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Precondition("batch size must be positive".into()));
        }
        self.sampler.validate()
    }

    fn rate_at(&self, step: usize) -> f64 {
        match self.schedule {
            LrSchedule::Constant => self.learning_rate,
            LrSchedule::Cosine => {
                let t = step as f64 / self.steps.max(1) as f64;
                0.5 * self.learning_rate * (1.0 + (std::f64::consts::PI * t).cos())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: FusionNet,
    /// Mean loss of the last batch.
    pub final_loss: f64,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * g;
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= lr * mh / (vh.sqrt() + Self::EPS);
        }
    }
}

/// Trains `net` in place on batches drawn from `data(step, batch_size)`.
pub fn train_fusion_on<F>(cfg: &TrainConfig, mut net: FusionNet, mut data: F) -> Result<TrainOutcome>
where
    F: FnMut(usize, usize) -> Result<Vec<TrainingPair>>,
{
    cfg.validate()?;
    net.check_finite()?;
    let mut adam = Adam::new(net.params.len());
    let mut final_loss = f64::NAN;
    for step in 0..cfg.steps {
        let batch = data(step, cfg.batch_size)?;
        if batch.is_empty() {
            return Err(Error::Empty("training batch"));
        }
        let (loss, grad) = net.loss_and_gradient(&batch, cfg.delta);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { step, loss });
        }
        adam.step(&mut net.params, &grad, cfg.rate_at(step));
        if !net.is_finite() {
            return Err(Error::Divergence { step, loss: f64::NAN });
        }
        final_loss = loss;
    }
    Ok(TrainOutcome { net, final_loss })
}

/// Random stream for training batches; independent of the init stream.
pub fn training_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Random stream for evaluation data, disjoint from the training stream.
pub fn heldout_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    rng
}

/// Trains the standard architecture on the synthetic sampler.
pub fn train_fusion(cfg: &TrainConfig) -> Result<TrainOutcome> {
    let net = FusionNet::standard(cfg.seed);
    let mut rng = training_rng(cfg.seed);
    let sampler = cfg.sampler;
    train_fusion_on(cfg, net, |_, n| sample_training_pairs(&mut rng, n, &sampler))
}

/// Root-mean-square error over every channel of `pairs`.
pub fn rmse_of(pairs: &[TrainingPair], predictions: &[[f64; 3]]) -> f64 {
    let sum: f64 = pairs
        .iter()
        .zip(predictions)
        .flat_map(|(p, q)| (0..3).map(move |ch| (q[ch] - p.hdr[ch]).powi(2)))
        .sum();
    (sum / (pairs.len() * 3) as f64).sqrt()
}

pub fn net_rmse(net: &FusionNet, pairs: &[TrainingPair]) -> Result<f64> {
    let inputs: Vec<[f64; 6]> = pairs.iter().map(|p| p.input()).collect();
    Ok(rmse_of(pairs, &fusion_forward_many(net, &inputs)?))
}

pub fn rule_rmse(pairs: &[TrainingPair]) -> f64 {
    let preds: Vec<[f64; 3]> = pairs.iter().map(|p| p.rule_prediction()).collect();
    rmse_of(pairs, &preds)
}
